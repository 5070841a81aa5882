use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::point::{validate_dim, BoxRegion, Point};

pub type PhaseFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// `(cos φ, sin φ, 0, …)`, or `±1` in one dimension.
    Phase(PhaseFn),
    General(VectorFn),
}

/// A unit vector field `v` on ℝⁿ with a declared Lipschitz bound `K`.
#[derive(Clone)]
pub struct UnitVectorField {
    dim: usize,
    lipschitz_k: f64,
    descriptor: Descriptor,
    repr: Repr,
}

impl fmt::Debug for UnitVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitVectorField")
            .field("descriptor", &self.descriptor.to_string())
            .field("dim", &self.dim)
            .field("lipschitz_k", &self.lipschitz_k)
            .finish()
    }
}

/// Build `v = (cos φ, sin φ, 0, …)`: `e₁` rotated by `phase(X)` in the
/// `(x₁, x₂)` plane. `phase_lipschitz` must bound the Lipschitz constant of
/// `phase`; it is also a bound for `v` because a chord is no longer than its arc.
///
/// In one dimension only constant fields exist; `phase` must then be constant
/// (`phase_lipschitz == 0`) and the field is `sign(cos φ)`.
pub fn make_phase_field<F>(dimension: usize, phase: F, phase_lipschitz: f64) -> Result<UnitVectorField>
where
    F: Fn(&Point) -> f64 + Send + Sync + 'static,
{
    make_phase_field_named(dimension, Arc::new(phase), phase_lipschitz, Descriptor::new("phase"))
}

fn make_phase_field_named(
    dimension: usize,
    phase: PhaseFn,
    phase_lipschitz: f64,
    mut descriptor: Descriptor,
) -> Result<UnitVectorField> {
    validate_dim(dimension)?;
    if !(phase_lipschitz >= 0.0 && phase_lipschitz.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "phase_lipschitz",
            reason: format!("must be finite and nonnegative, got {phase_lipschitz}"),
        });
    }
    if dimension == 1 && phase_lipschitz != 0.0 {
        return Err(Error::InvalidDimension {
            got: 1,
            reason: "non-constant unit fields need n >= 2",
        });
    }
    if descriptor.get("dim").is_none() && dimension != 2 {
        descriptor = descriptor.with("dim", dimension as f64);
    }
    Ok(UnitVectorField {
        dim: dimension,
        lipschitz_k: phase_lipschitz,
        descriptor,
        repr: Repr::Phase(phase),
    })
}

impl UnitVectorField {
    /// A field given by arbitrary code. `lipschitz_k` is trusted as declared;
    /// check it with [`estimate_lipschitz`] before relying on it.
    pub fn custom<F>(dimension: usize, name: &str, lipschitz_k: f64, eval: F) -> Result<Self>
    where
        F: Fn(&Point) -> Point + Send + Sync + 'static,
    {
        validate_dim(dimension)?;
        if !(lipschitz_k >= 0.0 && lipschitz_k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lipschitz_k",
                reason: format!("must be finite and nonnegative, got {lipschitz_k}"),
            });
        }
        let descriptor = Descriptor {
            family: format!("custom-{name}"),
            params: vec![("k".into(), vec![lipschitz_k])],
        };
        Ok(Self {
            dim: dimension,
            lipschitz_k,
            descriptor,
            repr: Repr::General(Arc::new(eval)),
        })
    }

    /// `v ≡ e₁` rotated by `angle`.
    pub fn constant(dimension: usize, angle: f64) -> Result<Self> {
        Self::from_descriptor(&family_desc("constant", dimension).with("angle", angle))
    }

    /// Phase `a·x₁`; Lipschitz constant `|a|`.
    pub fn shear(dimension: usize, a: f64) -> Result<Self> {
        Self::from_descriptor(&family_desc("shear", dimension).with("a", a))
    }

    /// Phase `a·sin(b·x₁ + c·x₂)`; Lipschitz constant `|a|·√(b² + c²)`.
    pub fn sinusoid(dimension: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_descriptor(
            &family_desc("sinusoid", dimension)
                .with("a", a)
                .with("b", b)
                .with("c", c),
        )
    }

    /// Phase `a·xₙ` (n ≥ 3): the field turns in the `(x₁, x₂)` plane as `xₙ` varies.
    pub fn twist(dimension: usize, a: f64) -> Result<Self> {
        Self::from_descriptor(&family_desc("twist", dimension).with("a", a))
    }

    pub fn from_descriptor(d: &Descriptor) -> Result<Self> {
        let dim_f = d.scalar_or("dim", 2.0)?;
        if dim_f.fract() != 0.0 || dim_f < 1.0 {
            return Err(d.error("`dim` must be a positive integer".into()));
        }
        let dim = dim_f as usize;
        validate_dim(dim)?;
        let (phase, k): (PhaseFn, f64) = match d.family.as_str() {
            "constant" => {
                d.check_keys(&["angle", "dim"])?;
                let angle = d.scalar_or("angle", 0.0)?;
                if dim == 1 && angle.sin().abs() > 1e-12 {
                    return Err(d.error("in one dimension the angle must be 0 or pi".into()));
                }
                (Arc::new(move |_: &Point| angle), 0.0)
            }
            "shear" => {
                d.check_keys(&["a", "dim"])?;
                let a = d.require("a")?;
                (Arc::new(move |x: &Point| a * x[0]), a.abs())
            }
            "sinusoid" => {
                d.check_keys(&["a", "b", "c", "dim"])?;
                let (a, b, c) = (d.require("a")?, d.require("b")?, d.require("c")?);
                if dim < 2 {
                    return Err(d.error("sinusoid needs dim >= 2".into()));
                }
                (
                    Arc::new(move |x: &Point| a * (b * x[0] + c * x[1]).sin()),
                    a.abs() * b.hypot(c),
                )
            }
            "twist" => {
                d.check_keys(&["a", "dim"])?;
                let a = d.require("a")?;
                if dim < 3 {
                    return Err(d.error("twist needs dim >= 3".into()));
                }
                (Arc::new(move |x: &Point| a * x[dim - 1]), a.abs())
            }
            other => return Err(d.error(format!("unknown vector field family `{other}`"))),
        };
        let mut field = make_phase_field_named(dim, phase, k, d.clone())?;
        field.descriptor = d.clone();
        Ok(field)
    }

    pub(crate) fn with_descriptor(mut self, descriptor: Descriptor) -> Self {
        self.descriptor = descriptor;
        self
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> Point {
        match &self.repr {
            Repr::Phase(phase) => {
                let phi = phase(x);
                let mut v = Point::zeros(self.dim);
                if self.dim == 1 {
                    v.as_mut_slice()[0] = if phi.cos() >= 0.0 { 1.0 } else { -1.0 };
                } else {
                    let (s, c) = phi.sin_cos();
                    let out = v.as_mut_slice();
                    out[0] = c;
                    out[1] = s;
                }
                v
            }
            Repr::General(f) => f(x),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn lipschitz_k(&self) -> f64 {
        self.lipschitz_k
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }
}

fn family_desc(family: &str, dimension: usize) -> Descriptor {
    let d = Descriptor::new(family);
    if dimension == 2 {
        d
    } else {
        d.with("dim", dimension as f64)
    }
}

/// Catalog of unit fields with analytically known constants: a constant
/// field, a shear, a sinusoidal phase, and (n ≥ 3) a twist along `xₙ`.
pub fn catalog_vector_fields(dimension: usize) -> Result<Vec<UnitVectorField>> {
    validate_dim(dimension)?;
    if dimension == 1 {
        return Ok(vec![UnitVectorField::constant(1, 0.0)?]);
    }
    let mut out = vec![
        UnitVectorField::constant(dimension, 0.0)?,
        UnitVectorField::shear(dimension, 1.0)?,
        UnitVectorField::sinusoid(dimension, 0.5, 1.0, 1.0)?,
    ];
    if dimension >= 3 {
        out.push(UnitVectorField::twist(dimension, 1.0)?);
    }
    Ok(out)
}

/// How [`estimate_lipschitz`] draws point pairs.
#[derive(Clone, Debug)]
pub struct PairSampler {
    pub region: BoxRegion,
    pub pairs: usize,
    /// When set, the second point is the first plus a uniform offset in the
    /// ball of this radius instead of an independent draw from `region`.
    pub local_radius: Option<f64>,
}

impl PairSampler {
    pub fn uniform(region: BoxRegion, pairs: usize) -> Self {
        Self {
            region,
            pairs,
            local_radius: None,
        }
    }

    pub fn local(region: BoxRegion, pairs: usize, radius: f64) -> Self {
        Self {
            region,
            pairs,
            local_radius: Some(radius),
        }
    }

    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> (Point, Point) {
        let x = uniform_in_box(&self.region, rng);
        let y = match self.local_radius {
            None => uniform_in_box(&self.region, rng),
            Some(r) => x + uniform_in_ball(self.region.dim(), r, rng),
        };
        (x, y)
    }
}

pub(crate) fn uniform_in_box(b: &BoxRegion, rng: &mut impl Rng) -> Point {
    let mut p = b.lo;
    for (i, c) in p.as_mut_slice().iter_mut().enumerate() {
        *c = rng.gen_range(b.lo[i]..b.hi[i]);
    }
    p
}

fn uniform_in_ball(dim: usize, r: f64, rng: &mut impl Rng) -> Point {
    loop {
        let mut p = Point::zeros(dim);
        for c in p.as_mut_slice() {
            *c = rng.gen_range(-1.0..1.0);
        }
        if p.norm_sq() <= 1.0 {
            return p * r;
        }
    }
}

/// Empirical lower bound on the Lipschitz constant of `field`: the largest
/// ratio `‖v(X) − v(Y)‖ / ‖X − Y‖` over sampled pairs. Coincident pairs are skipped.
pub fn estimate_lipschitz(field: &UnitVectorField, sampler: &PairSampler, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..sampler.pairs {
        let (x, y) = sampler.draw(&mut rng);
        let d = x.dist(&y);
        if d == 0.0 {
            continue;
        }
        let ratio = field.eval(&x).dist(&field.eval(&y)) / d;
        best = best.max(ratio);
    }
    best
}
