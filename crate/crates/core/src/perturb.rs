//! The perturbation maps `S_s(X) = X + s·v(X)` and their certified inverses.
//!
//! For `q = |s|·K < 1` the map `X ↦ Z − s·v(X)` is a contraction with factor
//! `q` whose fixed point is `S_s⁻¹(Z)`. Iteration starts at `X₀ = Z` and stops
//! as soon as the a-posteriori bound `‖X_{k+1} − X_k‖·q/(1 − q)` is below the
//! requested tolerance, so every returned inverse carries that tolerance as a
//! certificate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Descriptor, UnitVectorField};
use crate::point::Point;

/// Largest admissible `T·K` for shift windows `|s| ≤ T`.
pub const MAX_SHIFT_CONTRACTION: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverSpec {
    /// Guaranteed bound on `‖computed − true inverse‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl SolverSpec {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "solver.tolerance",
                reason: format!("must be positive, got {tolerance}"),
            });
        }
        if max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "solver.max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            tolerance,
            max_iterations,
        })
    }
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

/// Admissible shift window `|s| ≤ T` for a field with constant `K`:
/// requires `T·K ≤ 0.95`. With `K = 0` any positive `T` is allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftWindow {
    pub t_bound: f64,
    pub lipschitz_k: f64,
}

impl ShiftWindow {
    pub fn new(t_bound: f64, lipschitz_k: f64) -> Result<Self> {
        if !(t_bound > 0.0 && t_bound.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: format!("must be positive and finite, got {t_bound}"),
            });
        }
        let tk = t_bound * lipschitz_k;
        if tk > MAX_SHIFT_CONTRACTION {
            return Err(Error::ShiftBound {
                tk,
                limit: MAX_SHIFT_CONTRACTION,
            });
        }
        Ok(Self {
            t_bound,
            lipschitz_k,
        })
    }

    /// `min(cap, 1/(2K))`, with `1/0 = ∞`.
    pub fn default_half_inverse(cap: f64, lipschitz_k: f64) -> f64 {
        if lipschitz_k == 0.0 {
            cap
        } else {
            cap.min(0.5 / lipschitz_k)
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        s.abs() <= self.t_bound
    }
}

/// Outcome of one inversion, with its certificate.
#[derive(Clone, Copy, Debug)]
pub struct Inversion {
    pub point: Point,
    pub iterations: usize,
    /// First step `‖X₁ − X₀‖` (equals `|s|` from `X₀ = Z`).
    pub first_step: f64,
    /// Certified bound on the distance to the exact inverse.
    pub error_bound: f64,
}

#[derive(Clone, Debug)]
pub struct PerturbationMap {
    field: UnitVectorField,
    s: f64,
    q: f64,
    solver: SolverSpec,
}

impl PerturbationMap {
    /// Rejects `|s|·K ≥ 1`.
    pub fn new(field: UnitVectorField, s: f64, solver: SolverSpec) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: "must be finite".into(),
            });
        }
        let q = s.abs() * field.lipschitz_k();
        if q >= 1.0 {
            return Err(Error::Contraction { q });
        }
        Ok(Self {
            field,
            s,
            q,
            solver,
        })
    }

    /// Like [`new`](Self::new) but also checks `|s| ≤ T` within `window`.
    pub fn in_window(field: UnitVectorField, s: f64, window: &ShiftWindow, solver: SolverSpec) -> Result<Self> {
        if !window.contains(s) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("|s| = {} exceeds T = {}", s.abs(), window.t_bound),
            });
        }
        Self::new(field, s, solver)
    }

    pub fn field(&self) -> &UnitVectorField {
        &self.field
    }

    pub fn shift(&self) -> f64 {
        self.s
    }

    pub fn contraction_q(&self) -> f64 {
        self.q
    }

    pub fn solver(&self) -> &SolverSpec {
        &self.solver
    }

    pub fn dimension(&self) -> usize {
        self.field.dimension()
    }

    /// `S_s(X) = X + s·v(X)`.
    #[inline]
    pub fn apply(&self, x: &Point) -> Point {
        x.offset(self.s, &self.field.eval(x))
    }

    /// `S_s⁻¹(Z)` to within `solver.tolerance`.
    pub fn invert(&self, z: &Point) -> Result<Point> {
        self.invert_detailed(z).map(|inv| inv.point)
    }

    pub fn invert_detailed(&self, z: &Point) -> Result<Inversion> {
        if self.q == 0.0 {
            // v is constant (or s = 0): one step is exact.
            return Ok(Inversion {
                point: z.offset(-self.s, &self.field.eval(z)),
                iterations: 1,
                first_step: self.s.abs(),
                error_bound: 0.0,
            });
        }
        let factor = self.q / (1.0 - self.q);
        let mut x = *z;
        let mut first_step = 0.0;
        let mut step = f64::INFINITY;
        for k in 1..=self.solver.max_iterations {
            let next = z.offset(-self.s, &self.field.eval(&x));
            step = next.dist(&x);
            if k == 1 {
                first_step = step;
            }
            x = next;
            let bound = step * factor;
            if bound <= self.solver.tolerance {
                return Ok(Inversion {
                    point: x,
                    iterations: k,
                    first_step,
                    error_bound: bound,
                });
            }
        }
        Err(Error::SolverExhausted {
            iterations: self.solver.max_iterations,
            last_step: step,
            tolerance: self.solver.tolerance,
        })
    }

    /// Inverse for hot loops where the budget was checked up front with
    /// [`check_budget`](Self::check_budget): returns the last iterate instead of failing.
    #[inline]
    pub(crate) fn invert_best_effort(&self, z: &Point) -> Point {
        if self.q == 0.0 {
            return z.offset(-self.s, &self.field.eval(z));
        }
        let factor = self.q / (1.0 - self.q);
        let mut x = *z;
        for _ in 0..self.solver.max_iterations {
            let next = z.offset(-self.s, &self.field.eval(&x));
            let step = next.dist(&x);
            x = next;
            if step * factor <= self.solver.tolerance {
                break;
            }
        }
        x
    }

    /// A-priori iteration count that certifies the tolerance from `X₀ = Z`:
    /// steps shrink like `qᵏ·|s|`.
    pub fn iterations_needed(&self) -> usize {
        if self.q == 0.0 {
            return 1;
        }
        let d0 = self.s.abs();
        let target = self.solver.tolerance * (1.0 - self.q) / (d0 * self.q);
        if target >= 1.0 {
            return 1;
        }
        1 + (target.ln() / self.q.ln()).ceil() as usize
    }

    /// Fails when `max_iterations` cannot certify the tolerance for every `Z`.
    pub fn check_budget(&self) -> Result<()> {
        let needed = self.iterations_needed();
        if needed > self.solver.max_iterations {
            return Err(Error::SolverBudget {
                max_iterations: self.solver.max_iterations,
                needed,
                tolerance: self.solver.tolerance,
                q: self.q,
            });
        }
        Ok(())
    }

    /// Lipschitz constant of `S_s⁻¹`: `1/(1 − q)`.
    pub fn inverse_lipschitz(&self) -> f64 {
        1.0 / (1.0 - self.q)
    }

    /// The field `w = v∘S_s⁻¹`, declared with constant `K/(1 − |s|K)`.
    pub fn pushforward_field(&self) -> Result<UnitVectorField> {
        self.check_budget()?;
        let k = self.field.lipschitz_k() / (1.0 - self.q);
        let map = self.clone();
        let base: &Descriptor = self.field.descriptor();
        let mut descriptor = Descriptor {
            family: format!("pushforward-{}", base.family),
            params: base.params.clone(),
        };
        descriptor.params.push(("s".into(), vec![self.s]));
        let w = UnitVectorField::custom(self.dimension(), "pushforward", k, move |x: &Point| {
            map.field.eval(&map.invert_best_effort(x))
        })?;
        Ok(w.with_descriptor(descriptor))
    }

    /// `max ‖S_s⁻¹(S_s(X)) − X‖` over `points`.
    pub fn roundtrip_error(&self, points: &[Point]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for x in points {
            let back = self.invert(&self.apply(x))?;
            worst = worst.max(back.dist(x));
        }
        Ok(worst)
    }
}
