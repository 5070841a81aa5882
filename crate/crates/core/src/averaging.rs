//! Directional averages `M_t`, their shifted and pushforward variants, and
//! the truncated maximal operator over a dyadic scale grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, UnitVectorField};
use crate::perturb::PerturbationMap;
use crate::point::Point;
use crate::quadrature::{NodeTable, QuadratureSpec};

/// Whether the integrand is `F` or `|F|`. Maximal estimates always use `|F|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    Signed,
    Modulus,
}

/// Dyadic scales `t_j = t_max·2^{−j}`, `j = 0..=levels`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaximalSpec {
    pub t_max: f64,
    pub levels: usize,
}

impl MaximalSpec {
    pub fn new(t_max: f64, levels: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "maximal.t_max",
                reason: format!("must be positive, got {t_max}"),
            });
        }
        if levels < 1 {
            return Err(Error::InvalidParameter {
                name: "maximal.levels",
                reason: "need at least one refinement level".into(),
            });
        }
        Ok(Self { t_max, levels })
    }

    /// Decreasing scale grid.
    pub fn scales(&self) -> Vec<f64> {
        (0..=self.levels)
            .map(|j| self.t_max * 0.5f64.powi(j as i32))
            .collect()
    }

    pub fn finest(&self) -> f64 {
        self.t_max * 0.5f64.powi(self.levels as i32)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            reason: format!("averaging radius must be positive, got {t}"),
        })
    }
}

fn check_dims(f: &ScalarField, x: &Point) -> Result<()> {
    if f.dimension() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            got: x.dim(),
        });
    }
    Ok(())
}

/// Average of `F` (or `|F|`) over `center + t·u·dir`, `u` the nodes of `table`.
#[inline]
pub fn average_on(table: &NodeTable, f: &ScalarField, center: &Point, dir: &Point, t: f64, integrand: Integrand) -> f64 {
    match integrand {
        Integrand::Signed => table.mean(|u| f.eval(&center.offset(t * u, dir))),
        Integrand::Modulus => table.mean(|u| f.eval_abs(&center.offset(t * u, dir))),
    }
}

/// `(1/2t)∫_{−t}^{t} F(X + β·dir) dβ` with `quad.nodes` nodes.
pub fn line_average(f: &ScalarField, direction: &Point, x: &Point, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    line_average_with(f, direction, x, t, quad, Integrand::Signed)
}

pub fn line_average_with(
    f: &ScalarField,
    direction: &Point,
    x: &Point,
    t: f64,
    quad: &QuadratureSpec,
    integrand: Integrand,
) -> Result<f64> {
    check_t(t)?;
    check_dims(f, x)?;
    if direction.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: direction.dim(),
        });
    }
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "direction",
            reason: format!("must be a unit vector, has norm {}", direction.norm()),
        });
    }
    let table = quad.table(quad.nodes);
    Ok(average_on(&table, f, x, direction, t, integrand))
}

/// `M_t(F)(X)`: average along `v(X)`.
pub fn m_t(f: &ScalarField, v: &UnitVectorField, x: &Point, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    line_average(f, &v.eval(x), x, t, quad)
}

/// `(1/2t)∫ F(X + (s + β)·v(X)) dβ`.
pub fn m_t_shifted(
    f: &ScalarField,
    v: &UnitVectorField,
    x: &Point,
    s: f64,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let dir = v.eval(x);
    line_average(f, &dir, &x.offset(s, &dir), t, quad)
}

/// `(1/2t)∫ F(X + β·v(S_s⁻¹(X))) dβ` (or with `|F|`).
pub fn m_t_pushforward(
    f: &ScalarField,
    map: &PerturbationMap,
    x: &Point,
    t: f64,
    quad: &QuadratureSpec,
    integrand: Integrand,
) -> Result<f64> {
    let dir = map.field().eval(&map.invert(x)?);
    line_average_with(f, &dir, x, t, quad, integrand)
}

/// `max_j M_{t_j}^s(|F|)(X)` over the dyadic grid of `spec`.
pub fn maximal(
    f: &ScalarField,
    map: &PerturbationMap,
    x: &Point,
    spec: &MaximalSpec,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_dims(f, x)?;
    let dir = map.field().eval(&map.invert(x)?);
    Ok(MaximalPlan::new(spec, quad).along(f, x, &dir))
}

/// Precomputed node tables for repeated maximal evaluations.
#[derive(Clone, Debug)]
pub struct MaximalPlan {
    levels: Vec<(f64, NodeTable)>,
    t_max: f64,
}

impl MaximalPlan {
    pub fn new(spec: &MaximalSpec, quad: &QuadratureSpec) -> Self {
        let levels = spec
            .scales()
            .into_iter()
            .map(|t| (t, quad.table(quad.nodes_for_scale(t, spec.t_max))))
            .collect();
        Self {
            levels,
            t_max: spec.t_max,
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Maximal value of `|F|` along a fixed direction through `x`.
    #[inline]
    pub fn along(&self, f: &ScalarField, x: &Point, dir: &Point) -> f64 {
        self.levels
            .iter()
            .map(|(t, table)| average_on(table, f, x, dir, *t, Integrand::Modulus))
            .fold(0.0, f64::max)
    }

    /// Per-scale values along `dir`, coarsest first.
    pub fn profile(&self, f: &ScalarField, x: &Point, dir: &Point) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .map(|(t, table)| (*t, average_on(table, f, x, dir, *t, Integrand::Modulus)))
            .collect()
    }

    /// `M_*^s(F)(X)`; the map's solver budget must have been checked.
    #[inline]
    pub fn at(&self, f: &ScalarField, map: &PerturbationMap, x: &Point) -> f64 {
        let dir = map.field().eval(&map.invert_best_effort(x));
        self.along(f, x, &dir)
    }

    /// Like [`at`](Self::at), but returns the cheap bound `sup_{B(X, t_max)} |F|`
    /// whenever that bound is already `≤ floor`; superlevel sets above `floor`
    /// are unaffected.
    #[inline]
    pub fn at_above(&self, f: &ScalarField, map: &PerturbationMap, x: &Point, floor: f64) -> f64 {
        let bound = f.ball_sup_abs(x, self.t_max);
        if bound <= floor {
            return bound;
        }
        self.at(f, map, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::SolverSpec;
    use crate::point::BoxRegion;

    fn unit_square() -> ScalarField {
        ScalarField::indicator(BoxRegion::unit(2).unwrap())
    }

    fn e1() -> UnitVectorField {
        UnitVectorField::constant(2, 0.0).unwrap()
    }

    #[test]
    fn constants_average_exactly() {
        let f = ScalarField::constant(2, 2.5).unwrap();
        let q = QuadratureSpec::default();
        let got = line_average(&f, &Point::xy(0.6, 0.8), &Point::xy(1.0, 2.0), 0.7, &q).unwrap();
        assert_eq!(got, 2.5);
    }

    #[test]
    fn linear_function_averages_to_center() {
        let f = ScalarField::custom(2, "x", crate::fields::Regularity::Smooth, None, Some(1.0), f64::INFINITY, |p| p[0]).unwrap();
        let q = QuadratureSpec::default();
        let got = line_average(&f, &Point::xy(1.0, 0.0), &Point::xy(0.37, -2.0), 0.5, &q).unwrap();
        assert!((got - 0.37).abs() < 1e-15);
        let shifted = m_t_shifted(&f, &e1(), &Point::xy(0.0, 0.0), 0.3, 0.9, &q).unwrap();
        assert!((shifted - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_radius_and_direction() {
        let f = unit_square();
        let q = QuadratureSpec::default();
        let x = Point::xy(0.5, 0.5);
        assert!(line_average(&f, &Point::xy(1.0, 0.0), &x, 0.0, &q).is_err());
        assert!(line_average(&f, &Point::xy(1.0, 0.0), &x, -1.0, &q).is_err());
        assert!(line_average(&f, &Point::xy(1.0, 0.1), &x, 0.1, &q).is_err());
    }

    #[test]
    fn indicator_segment_geometry() {
        let f = unit_square();
        let q = QuadratureSpec::default();
        assert_eq!(m_t(&f, &e1(), &Point::xy(0.5, 0.5), 0.25, &q).unwrap(), 1.0);
        assert_eq!(m_t(&f, &e1(), &Point::xy(0.0, 0.5), 0.25, &q).unwrap(), 0.5);
        assert_eq!(m_t_shifted(&f, &e1(), &Point::xy(-0.3, 0.5), 0.3, 0.2, &q).unwrap(), 0.5);
    }

    #[test]
    fn shifted_and_pushforward_reduce_to_m_t_at_zero_shift() {
        let f = ScalarField::bump(Point::xy(0.2, 0.1), 0.3).unwrap();
        let v = UnitVectorField::shear(2, 1.0).unwrap();
        let q = QuadratureSpec::default();
        let x = Point::xy(0.4, -0.1);
        let base = m_t(&f, &v, &x, 0.2, &q).unwrap();
        assert_eq!(m_t_shifted(&f, &v, &x, 0.0, 0.2, &q).unwrap(), base);
        let map = PerturbationMap::new(v, 0.0, SolverSpec::default()).unwrap();
        assert_eq!(m_t_pushforward(&f, &map, &x, 0.2, &q, Integrand::Signed).unwrap(), base);
    }

    #[test]
    fn maximal_of_zero_is_zero_and_inside_square_is_one() {
        let q = QuadratureSpec::default();
        let spec = MaximalSpec::new(0.25, 8).unwrap();
        let map = PerturbationMap::new(e1(), 0.2, SolverSpec::default()).unwrap();
        let x = Point::xy(0.5, 0.5);
        assert_eq!(maximal(&ScalarField::zero(2).unwrap(), &map, &x, &spec, &q).unwrap(), 0.0);
        assert_eq!(maximal(&unit_square(), &map, &x, &spec, &q).unwrap(), 1.0);
    }

    #[test]
    fn maximal_spec_grid_is_dyadic() {
        let s = MaximalSpec::new(0.25, 3).unwrap();
        assert_eq!(s.scales(), vec![0.25, 0.125, 0.0625, 0.03125]);
        assert!(MaximalSpec::new(0.25, 0).is_err());
        assert!(MaximalSpec::new(0.0, 3).is_err());
    }

    #[test]
    fn pruned_evaluation_only_changes_values_below_floor() {
        let f = ScalarField::bump(Point::xy(0.0, 0.0), 0.25).unwrap();
        let plan = MaximalPlan::new(&MaximalSpec::new(0.25, 6).unwrap(), &QuadratureSpec::default());
        let map = PerturbationMap::new(UnitVectorField::shear(2, 1.0).unwrap(), 0.3, SolverSpec::default()).unwrap();
        for i in 0..50 {
            let x = Point::xy(-1.5 + 0.06 * i as f64, 0.1);
            let exact = plan.at(&f, &map, &x);
            let pruned = plan.at_above(&f, &map, &x, 0.2);
            if exact > 0.2 {
                assert_eq!(pruned, exact);
            } else {
                assert!(pruned <= 0.2 || pruned == exact);
            }
        }
    }
}
