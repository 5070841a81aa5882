use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Open intervals: touching endpoints do not intersect.
    pub fn intersects(&self, other: &Interval) -> bool {
        self.a < other.b && other.a < self.b
    }
}

/// Finite collection of open intervals.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IntervalCollection {
    intervals: Vec<Interval>,
}

impl IntervalCollection {
    pub fn new(intervals: Vec<Interval>) -> Self {
        Self { intervals }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        pairs
            .iter()
            .map(|&(a, b)| Interval::new(a, b))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Measure of the union, by a sweep over sorted left endpoints.
    pub fn union_measure(&self) -> f64 {
        let mut sorted = self.intervals.clone();
        sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut total = 0.0;
        let mut current: Option<(f64, f64)> = None;
        for iv in sorted {
            current = match current {
                Some((a, b)) if iv.a <= b => Some((a, b.max(iv.b))),
                Some((a, b)) => {
                    total += b - a;
                    Some((iv.a, iv.b))
                }
                None => Some((iv.a, iv.b)),
            };
        }
        if let Some((a, b)) = current {
            total += b - a;
        }
        total
    }
}

/// Greedy Vitali selection: longest first (ties to the leftmost), dropping
/// everything that meets a chosen interval. Requires `c < m(⋃C)`; the result
/// is pairwise disjoint with total length `> c/3`.
pub fn greedy_cover_select(collection: &IntervalCollection, c: f64) -> Result<Vec<Interval>> {
    let union = collection.union_measure();
    if !(c < union) {
        return Err(Error::CoverPrecondition { c, union });
    }
    let mut order: Vec<&Interval> = collection.intervals.iter().collect();
    order.sort_by(|x, y| y.length().total_cmp(&x.length()).then(x.a.total_cmp(&y.a)));
    let mut chosen: Vec<Interval> = Vec::new();
    for iv in order {
        if chosen.iter().all(|c| !c.intersects(iv)) {
            chosen.push(*iv);
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coll(p: &[(f64, f64)]) -> IntervalCollection {
        IntervalCollection::from_pairs(p).unwrap()
    }

    #[test]
    fn single() {
        let got = greedy_cover_select(&coll(&[(0.0, 1.0)]), 0.5).unwrap();
        assert_eq!(got, vec![Interval { a: 0.0, b: 1.0 }]);
    }

    #[test]
    fn nested_takes_outer() {
        let got = greedy_cover_select(&coll(&[(0.0, 1.0), (0.0, 3.0)]), 2.9).unwrap();
        assert_eq!(got, vec![Interval { a: 0.0, b: 3.0 }]);
    }

    #[test]
    fn chain_of_three() {
        let c = coll(&[(0.0, 2.0), (1.0, 3.0), (2.0, 4.0)]);
        assert_eq!(c.union_measure(), 4.0);
        let got = greedy_cover_select(&c, 3.9).unwrap();
        assert_eq!(got, vec![Interval { a: 0.0, b: 2.0 }, Interval { a: 2.0, b: 4.0 }]);
    }

    #[test]
    fn precondition() {
        let c = coll(&[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(c.union_measure(), 2.0);
        assert!(matches!(greedy_cover_select(&c, 2.0), Err(Error::CoverPrecondition { .. })));
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
    }
}
