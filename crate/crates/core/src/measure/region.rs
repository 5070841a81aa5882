use crate::point::{BoxRegion, Point};

/// A measurable set with a known bounding box.
pub trait Region: Sync {
    fn contains(&self, x: &Point) -> bool;

    fn bounding_box(&self) -> BoxRegion;

    /// `Some(inside)` when the closed ball `B(x, r)` lies entirely inside or
    /// entirely outside the set; `None` when undecided.
    fn classify_ball(&self, _x: &Point, _r: f64) -> Option<bool> {
        None
    }
}

impl Region for BoxRegion {
    fn contains(&self, x: &Point) -> bool {
        BoxRegion::contains(self, x)
    }

    fn bounding_box(&self) -> BoxRegion {
        *self
    }

    fn classify_ball(&self, x: &Point, r: f64) -> Option<bool> {
        let depth = self.signed_depth(x);
        if depth > r {
            Some(true)
        } else if depth < -r {
            Some(false)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Region for Ball {
    fn contains(&self, x: &Point) -> bool {
        x.dist(&self.center) <= self.radius
    }

    fn bounding_box(&self) -> BoxRegion {
        let mut lo = self.center;
        let mut hi = self.center;
        for (l, h) in lo.as_mut_slice().iter_mut().zip(hi.as_mut_slice()) {
            *l -= self.radius;
            *h += self.radius;
        }
        BoxRegion { lo, hi }
    }

    fn classify_ball(&self, x: &Point, r: f64) -> Option<bool> {
        let d = x.dist(&self.center);
        if d + r < self.radius {
            Some(true)
        } else if d - r > self.radius {
            Some(false)
        } else {
            None
        }
    }
}

/// Arbitrary indicator with a declared bounding box.
pub struct IndicatorRegion<F> {
    bbox: BoxRegion,
    indicator: F,
}

impl<F: Fn(&Point) -> bool + Sync> IndicatorRegion<F> {
    pub fn new(bbox: BoxRegion, indicator: F) -> Self {
        Self { bbox, indicator }
    }
}

impl<F: Fn(&Point) -> bool + Sync> Region for IndicatorRegion<F> {
    fn contains(&self, x: &Point) -> bool {
        self.bbox.contains(x) && (self.indicator)(x)
    }

    fn bounding_box(&self) -> BoxRegion {
        self.bbox
    }
}
