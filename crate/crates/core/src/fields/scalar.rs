use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use statrs::function::beta::beta;
use statrs::function::gamma::{gamma, gamma_lr};

use super::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::point::{validate_dim, BoxRegion, Point};

/// Gaussian bumps are cut off at this many standard widths.
pub const BUMP_CUTOFF_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    ContinuousCompactSupport,
    Indicator,
    TruncatedSingularity,
    Smooth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormProvenance {
    ClosedForm,
    Declared,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LpNorm {
    pub p: f64,
    pub value: f64,
    pub provenance: NormProvenance,
}

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Zero,
    /// Not compactly supported; only used by operator tests.
    Constant,
    Bump { center: Point, sigma: f64 },
    Indicator { cell: BoxRegion },
    Singularity { center: Point, gamma: f64, radius: f64 },
    Tent { center: Point, radius: f64 },
    Custom { f: ScalarFn, sup_abs: f64 },
}

/// A test function `F` on ℝⁿ: `scale × shape`.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    shape: Shape,
    scale: f64,
    regularity: Regularity,
    support_box: Option<BoxRegion>,
    lp_norms: Vec<LpNorm>,
    lipschitz: Option<f64>,
    descriptor: Descriptor,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("descriptor", &self.descriptor.to_string())
            .field("regularity", &self.regularity)
            .field("support_box", &self.support_box)
            .finish()
    }
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

fn point_desc(d: Descriptor, key: &str, p: &Point) -> Descriptor {
    if p.as_slice().iter().all(|c| *c == 0.0) {
        d
    } else {
        d.with_vec(key, p.as_slice())
    }
}

fn dim_desc(d: Descriptor, dim: usize) -> Descriptor {
    if dim == 2 {
        d
    } else {
        d.with("dim", dim as f64)
    }
}

impl ScalarField {
    fn build(dim: usize, shape: Shape, regularity: Regularity, descriptor: Descriptor) -> Self {
        let mut f = Self {
            dim,
            shape,
            scale: 1.0,
            regularity,
            support_box: None,
            lp_norms: Vec::new(),
            lipschitz: None,
            descriptor,
        };
        f.support_box = f.shape_support();
        f.lipschitz = f.shape_lipschitz();
        f.lp_norms = [1.0, 2.0]
            .iter()
            .filter_map(|&p| {
                f.closed_form_norm(p).map(|value| LpNorm {
                    p,
                    value,
                    provenance: NormProvenance::ClosedForm,
                })
            })
            .collect();
        f
    }

    pub fn zero(dim: usize) -> Result<Self> {
        validate_dim(dim)?;
        Ok(Self::build(
            dim,
            Shape::Zero,
            Regularity::ContinuousCompactSupport,
            dim_desc(Descriptor::new("zero"), dim),
        ))
    }

    /// `F ≡ value` on all of ℝⁿ. Not in any Lᵖ with p < ∞; for operator checks only.
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        validate_dim(dim)?;
        let mut f = Self::build(
            dim,
            Shape::Constant,
            Regularity::Smooth,
            dim_desc(Descriptor::new("constant"), dim).with("value", value),
        );
        f.scale = value;
        f.lipschitz = Some(0.0);
        Ok(f)
    }

    /// `exp(−‖X − c‖²/σ²)` cut off at `‖X − c‖ = 4σ`, unit peak.
    pub fn bump(center: Point, sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        let d = dim_desc(Descriptor::new("bump"), center.dim()).with("sigma", sigma);
        Ok(Self::build(
            center.dim(),
            Shape::Bump { center, sigma },
            Regularity::Smooth,
            point_desc(d, "center", &center),
        ))
    }

    pub fn indicator(cell: BoxRegion) -> Self {
        let d = dim_desc(Descriptor::new("indicator"), cell.dim())
            .with_vec("lo", cell.lo.as_slice())
            .with_vec("hi", cell.hi.as_slice());
        Self::build(cell.dim(), Shape::Indicator { cell }, Regularity::Indicator, d)
    }

    /// `‖X − c‖^{−γ}` on `0 < ‖X − c‖ ≤ radius`, zero elsewhere (including at `c`).
    pub fn singularity(center: Point, gamma: f64, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        if !(gamma > 0.0 && gamma < center.dim() as f64) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("need 0 < gamma < n = {}, got {gamma}", center.dim()),
            });
        }
        let d = dim_desc(Descriptor::new("singularity"), center.dim())
            .with("gamma", gamma)
            .with("radius", radius);
        Ok(Self::build(
            center.dim(),
            Shape::Singularity {
                center,
                gamma,
                radius,
            },
            Regularity::TruncatedSingularity,
            point_desc(d, "center", &center),
        ))
    }

    /// Radial tent `max(0, 1 − ‖X − c‖/radius)`.
    pub fn tent(center: Point, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        let d = dim_desc(Descriptor::new("tent"), center.dim()).with("radius", radius);
        Ok(Self::build(
            center.dim(),
            Shape::Tent { center, radius },
            Regularity::ContinuousCompactSupport,
            point_desc(d, "center", &center),
        ))
    }

    /// Arbitrary code. `support_box` (when given) is enforced by `eval`;
    /// `sup_abs` must bound `|f|` and is used to skip work, so `f64::INFINITY`
    /// is the safe choice when unknown.
    pub fn custom<F>(
        dim: usize,
        name: &str,
        regularity: Regularity,
        support_box: Option<BoxRegion>,
        lipschitz: Option<f64>,
        sup_abs: f64,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        validate_dim(dim)?;
        let mut out = Self::build(
            dim,
            Shape::Custom {
                f: Arc::new(f),
                sup_abs,
            },
            regularity,
            Descriptor::new(format!("custom-{name}")),
        );
        out.support_box = support_box;
        out.lipschitz = lipschitz;
        Ok(out)
    }

    /// Attach a known `‖F‖_p` (e.g. computed offline).
    pub fn with_declared_norm(mut self, p: f64, value: f64) -> Result<Self> {
        if let Shape::Singularity { gamma, .. } = self.shape {
            if gamma * p >= self.dim as f64 {
                return Err(Error::InvalidParameter {
                    name: "p",
                    reason: format!("singularity with gamma {gamma} is not in L^{p}"),
                });
            }
        }
        self.lp_norms.retain(|n| n.p != p);
        self.lp_norms.push(LpNorm {
            p,
            value,
            provenance: NormProvenance::Declared,
        });
        Ok(self)
    }

    pub fn from_descriptor(d: &Descriptor) -> Result<Self> {
        let dim_hint = d
            .get("center")
            .or_else(|| d.get("lo"))
            .map(|v| v.len() as f64);
        let dim_f = match (d.scalar("dim")?, dim_hint) {
            (Some(a), Some(b)) if a != b => {
                return Err(d.error("`dim` disagrees with point parameters".into()))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => 2.0,
        };
        if dim_f.fract() != 0.0 || dim_f < 1.0 {
            return Err(d.error("`dim` must be a positive integer".into()));
        }
        let dim = dim_f as usize;
        validate_dim(dim)?;
        let center = match d.get("center") {
            Some(c) => Point::new(c)?,
            None => Point::zeros(dim),
        };
        let shape_keys = |extra: &[&str]| {
            let mut keys = vec!["dim", "scale", "l1"];
            keys.extend_from_slice(extra);
            d.check_keys(&keys)
        };
        let base = match d.family.as_str() {
            "zero" => {
                d.check_keys(&["dim"])?;
                return Self::zero(dim);
            }
            "constant" => {
                d.check_keys(&["dim", "value"])?;
                return Self::constant(dim, d.require("value")?);
            }
            "bump" => {
                shape_keys(&["sigma", "center"])?;
                Self::bump(center, d.require("sigma")?)?
            }
            "indicator" => {
                shape_keys(&["lo", "hi"])?;
                let lo = d.get("lo").ok_or_else(|| d.error("missing `lo`".into()))?;
                let hi = d.get("hi").ok_or_else(|| d.error("missing `hi`".into()))?;
                Self::indicator(BoxRegion::new(Point::new(lo)?, Point::new(hi)?)?)
            }
            "singularity" => {
                shape_keys(&["gamma", "radius", "center"])?;
                Self::singularity(center, d.require("gamma")?, d.scalar_or("radius", 1.0)?)?
            }
            "tent" => {
                shape_keys(&["radius", "center"])?;
                Self::tent(center, d.require("radius")?)?
            }
            other => return Err(d.error(format!("unknown scalar family `{other}`"))),
        };
        let scaled = match (d.scalar("scale")?, d.scalar("l1")?) {
            (Some(_), Some(_)) => return Err(d.error("give either `scale` or `l1`".into())),
            (Some(k), None) => base.scaled(k),
            (None, Some(target)) => base.normalized_l1()?.scaled(target),
            (None, None) => base,
        };
        Ok(scaled.with_descriptor(d.clone()))
    }

    fn with_descriptor(mut self, d: Descriptor) -> Self {
        self.descriptor = d;
        self
    }

    /// `k·F`, with norms and Lipschitz constant rescaled.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.scale *= k;
        for n in &mut out.lp_norms {
            n.value *= k.abs();
        }
        out.lipschitz = out.lipschitz.map(|l| l * k.abs());
        out.descriptor = self.descriptor.clone().with("scale", k);
        out
    }

    /// `F / ‖F‖₁`.
    pub fn normalized_l1(&self) -> Result<Self> {
        let l1 = self.l1_norm().ok_or_else(|| {
            Error::Precondition(format!("{} has no known L1 norm", self.descriptor))
        })?;
        if l1 <= 0.0 {
            return Err(Error::Precondition("cannot normalize a null function".into()));
        }
        let mut out = self.scaled(1.0 / l1);
        out.descriptor = self.descriptor.clone().with("l1", 1.0);
        Ok(out)
    }

    #[inline]
    fn shape_eval(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Constant => 1.0,
            Shape::Bump { center, sigma } => {
                let r2 = x.dist(center).powi(2);
                if r2 > (BUMP_CUTOFF_SIGMAS * sigma).powi(2) {
                    0.0
                } else {
                    (-r2 / (sigma * sigma)).exp()
                }
            }
            Shape::Indicator { cell } => {
                if cell.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Singularity {
                center,
                gamma,
                radius,
            } => {
                let r = x.dist(center);
                if r == 0.0 || r > *radius {
                    0.0
                } else if *gamma == 1.0 {
                    1.0 / r
                } else {
                    r.powf(-gamma)
                }
            }
            Shape::Tent { center, radius } => (1.0 - x.dist(center) / radius).max(0.0),
            Shape::Custom { f, .. } => {
                if let Some(b) = &self.support_box {
                    if !b.contains(x) {
                        return 0.0;
                    }
                }
                f(x)
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        self.scale * self.shape_eval(x)
    }

    #[inline]
    pub fn eval_abs(&self, x: &Point) -> f64 {
        self.eval(x).abs()
    }

    /// Upper bound for `|F|` on the closed ball `B(c, r)`; 0 when the ball
    /// misses the support.
    pub fn ball_sup_abs(&self, c: &Point, r: f64) -> f64 {
        let k = self.scale.abs();
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Constant => k,
            Shape::Bump { center, sigma } => {
                let m = (c.dist(center) - r).max(0.0);
                if m > BUMP_CUTOFF_SIGMAS * sigma {
                    0.0
                } else {
                    k * (-(m * m) / (sigma * sigma)).exp()
                }
            }
            Shape::Indicator { cell } => {
                if cell.distance(c) > r {
                    0.0
                } else {
                    k
                }
            }
            Shape::Singularity {
                center,
                gamma,
                radius,
            } => {
                let m = c.dist(center) - r;
                if m > *radius {
                    0.0
                } else if m <= 0.0 {
                    f64::INFINITY
                } else {
                    k * m.powf(-gamma)
                }
            }
            Shape::Tent { center, radius } => {
                let m = (c.dist(center) - r).max(0.0);
                k * (1.0 - m / radius).max(0.0)
            }
            Shape::Custom { sup_abs, .. } => match &self.support_box {
                Some(b) if b.distance(c) > r => 0.0,
                _ => k * sup_abs,
            },
        }
    }

    /// `sup |F|` (infinite for singularities).
    pub fn sup_abs(&self) -> f64 {
        let k = self.scale.abs();
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Singularity { .. } => f64::INFINITY,
            Shape::Custom { sup_abs, .. } => k * sup_abs,
            _ => k,
        }
    }

    fn shape_support(&self) -> Option<BoxRegion> {
        let ball_box = |c: &Point, r: f64| BoxRegion {
            lo: *c,
            hi: *c,
        }
        .inflate(r);
        match &self.shape {
            Shape::Zero => None,
            Shape::Constant => None,
            Shape::Bump { center, sigma } => Some(ball_box(center, BUMP_CUTOFF_SIGMAS * sigma)),
            Shape::Indicator { cell } => Some(*cell),
            Shape::Singularity { center, radius, .. } => Some(ball_box(center, *radius)),
            Shape::Tent { center, radius } => Some(ball_box(center, *radius)),
            Shape::Custom { .. } => None,
        }
    }

    fn shape_lipschitz(&self) -> Option<f64> {
        match &self.shape {
            Shape::Zero | Shape::Constant => Some(0.0),
            // max |∇ exp(−r²/σ²)| is attained at r = σ/√2.
            Shape::Bump { sigma, .. } => Some(2f64.sqrt() / sigma * (-0.5f64).exp()),
            Shape::Tent { radius, .. } => Some(1.0 / radius),
            _ => None,
        }
    }

    /// Closed-form `‖F‖_p` for the built-in shapes (None when infinite or unknown).
    pub fn closed_form_norm(&self, p: f64) -> Option<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return None;
        }
        let n = self.dim as f64;
        let k = self.scale.abs();
        let pth = match &self.shape {
            Shape::Zero => 0.0,
            Shape::Constant | Shape::Custom { .. } => return None,
            Shape::Bump { sigma, .. } => {
                let cut = BUMP_CUTOFF_SIGMAS * BUMP_CUTOFF_SIGMAS * p;
                (PI * sigma * sigma / p).powf(n / 2.0) * gamma_lr(n / 2.0, cut)
            }
            Shape::Indicator { cell } => cell.volume(),
            Shape::Singularity { gamma, radius, .. } => {
                let e = n - gamma * p;
                if e <= 0.0 {
                    return None;
                }
                n * unit_ball_volume(self.dim) * radius.powf(e) / e
            }
            Shape::Tent { radius, .. } => {
                n * unit_ball_volume(self.dim) * radius.powf(n) * beta(p + 1.0, n)
            }
        };
        Some(k * pth.powf(1.0 / p))
    }

    /// `‖F‖_p` from the declared list, else closed form.
    pub fn lp_norm(&self, p: f64) -> Option<f64> {
        self.lp_norms
            .iter()
            .find(|n| n.p == p)
            .map(|n| n.value)
            .or_else(|| self.closed_form_norm(p))
    }

    pub fn l1_norm(&self) -> Option<f64> {
        self.lp_norm(1.0)
    }

    pub fn lp_norms(&self) -> &[LpNorm] {
        &self.lp_norms
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn support_box(&self) -> Option<&BoxRegion> {
        self.support_box.as_ref()
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    /// Singularity exponent, if this is a truncated singularity.
    pub fn singularity_exponent(&self) -> Option<f64> {
        match self.shape {
            Shape::Singularity { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(
            self.regularity,
            Regularity::ContinuousCompactSupport | Regularity::Smooth
        )
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

/// The finite stand-in for a dense family in the L¹ unit ball: every member
/// has `‖F‖₁ = 1`. Members: Gaussian bump (σ = 0.25), indicator of the unit
/// cube, truncated singularities with γ = n/2 and γ = 3n/4 (radius 1), and a
/// tent of radius 0.5.
pub fn catalog_scalar_fields(dimension: usize) -> Result<Vec<ScalarField>> {
    validate_dim(dimension)?;
    let o = Point::zeros(dimension);
    let n = dimension as f64;
    Ok(vec![
        ScalarField::bump(o, 0.25)?.normalized_l1()?,
        ScalarField::indicator(BoxRegion::unit(dimension)?),
        ScalarField::singularity(o, n / 2.0, 1.0)?.normalized_l1()?,
        ScalarField::singularity(o, 0.75 * n, 1.0)?.normalized_l1()?,
        ScalarField::tent(o, 0.5)?.normalized_l1()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_indicator_has_unit_mass() {
        let f = ScalarField::indicator(BoxRegion::unit(2).unwrap());
        assert_eq!(f.l1_norm(), Some(1.0));
        assert_eq!(f.eval(&Point::xy(0.5, 0.5)), 1.0);
        assert_eq!(f.eval(&Point::xy(1.5, 0.5)), 0.0);
    }

    #[test]
    fn planar_singularity_mass_is_two_pi() {
        let f = ScalarField::singularity(Point::xy(0.0, 0.0), 1.0, 1.0).unwrap();
        assert!((f.l1_norm().unwrap() - 2.0 * PI).abs() < 1e-12);
        let g = f.normalized_l1().unwrap();
        assert!((g.eval(&Point::xy(0.5, 0.0)) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(g.eval(&Point::xy(0.0, 0.0)), 0.0);
    }

    #[test]
    fn singularity_outside_l1_is_rejected() {
        assert!(ScalarField::singularity(Point::xy(0.0, 0.0), 2.0, 1.0).is_err());
        let f = ScalarField::singularity(Point::xy(0.0, 0.0), 1.0, 1.0).unwrap();
        // γ·p = 2 = n: not square integrable
        assert!(f.closed_form_norm(2.0).is_none());
        assert!(f.clone().with_declared_norm(2.0, 1.0).is_err());
        assert!(f.lp_norms().iter().all(|n| 1.0 * n.p < 2.0));
    }

    #[test]
    fn bump_mass_matches_gaussian_integral() {
        let sigma = 0.25;
        let f = ScalarField::bump(Point::xy(0.0, 0.0), sigma).unwrap();
        let untruncated = PI * sigma * sigma;
        let rel = (untruncated - f.l1_norm().unwrap()) / untruncated;
        assert!(rel > 0.0 && rel < 1e-6, "truncation loss {rel}");
    }

    #[test]
    fn eval_vanishes_outside_support_box() {
        for f in catalog_scalar_fields(2).unwrap() {
            let b = *f.support_box().unwrap();
            for x in [b.hi.offset(1e-9, &Point::xy(1.0, 1.0)), b.lo.offset(-0.5, &Point::xy(1.0, 0.0))] {
                assert_eq!(f.eval(&x), 0.0, "{:?}", f);
            }
        }
    }

    #[test]
    fn catalog_is_l1_normalized() {
        for n in 1..=3 {
            for f in catalog_scalar_fields(n).unwrap() {
                assert!((f.l1_norm().unwrap() - 1.0).abs() < 1e-12, "{f:?}");
            }
        }
    }

    #[test]
    fn ball_sup_bounds_samples() {
        let c = Point::xy(0.3, -0.1);
        for f in catalog_scalar_fields(2).unwrap() {
            let bound = f.ball_sup_abs(&c, 0.2);
            for i in 0..200 {
                let a = i as f64 * 0.1;
                let x = c.offset(0.2 * (i as f64 / 200.0), &Point::xy(a.cos(), a.sin()));
                assert!(f.eval_abs(&x) <= bound, "{f:?} at {x:?}");
            }
        }
    }

    #[test]
    fn descriptors_round_trip_through_resolution() {
        for text in [
            "bump:sigma=0.25,l1=1",
            "indicator:lo=0;0,hi=1;1",
            "singularity:gamma=1,radius=1,l1=1",
            "tent:radius=0.5,center=0.1;0.2,scale=3",
            "zero",
        ] {
            let d: Descriptor = text.parse().unwrap();
            let f = ScalarField::from_descriptor(&d).unwrap();
            assert_eq!(f.descriptor().to_string(), text);
        }
        let bad: Descriptor = "bump:sigma=0.25,scale=1,l1=1".parse().unwrap();
        assert!(ScalarField::from_descriptor(&bad).is_err());
    }

    #[test]
    fn tent_norms_match_cone_volume() {
        let f = ScalarField::tent(Point::xy(0.0, 0.0), 0.5).unwrap();
        // cone of height 1 over a disc of radius 0.5
        assert!((f.l1_norm().unwrap() - PI * 0.25 / 3.0).abs() < 1e-14);
    }
}
