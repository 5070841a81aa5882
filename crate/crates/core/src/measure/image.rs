use serde::Serialize;

use super::grid::{measure_set, GridSpec, MeasureEstimate};
use super::region::Region;
use crate::error::{Error, Result};
use crate::fields::unit_ball_volume;
use crate::perturb::PerturbationMap;
use crate::point::Point;

/// Whether `S_s⁻¹(z) ∈ A`. The fixed-point iteration stops as soon as its
/// certified error ball around the iterate is decided by `region`.
fn pullback_contains(map: &PerturbationMap, region: &dyn Region, z: &Point) -> bool {
    let q = map.contraction_q();
    if q == 0.0 {
        return region.contains(&map.invert_best_effort(z));
    }
    let s = map.shift();
    // ‖Z − S⁻¹(Z)‖ = |s| exactly, since v is a unit field.
    if let Some(inside) = region.classify_ball(z, s.abs()) {
        return inside;
    }
    let factor = q / (1.0 - q);
    let tol = map.solver().tolerance;
    let mut x = *z;
    for _ in 0..map.solver().max_iterations {
        let next = z.offset(-s, &map.field().eval(&x));
        let bound = next.dist(&x) * factor;
        x = next;
        if let Some(inside) = region.classify_ball(&x, bound) {
            return inside;
        }
        if bound <= tol {
            break;
        }
    }
    region.contains(&x)
}

fn check_image_fits(region: &dyn Region, map: &PerturbationMap, grid: &GridSpec) -> Result<()> {
    if region.bounding_box().dim() != grid.dim() || map.dimension() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: if map.dimension() != grid.dim() {
                map.dimension()
            } else {
                region.bounding_box().dim()
            },
        });
    }
    let needed = region.bounding_box().inflate(map.shift().abs());
    if !grid.bounds.contains_box(&needed) {
        return Err(Error::BoxTooSmall {
            needed_lo: needed.lo.as_slice().to_vec(),
            needed_hi: needed.hi.as_slice().to_vec(),
        });
    }
    Ok(())
}

/// Grid estimate of `μ(S_s(A))` by pullback: a cell center `Z` is in the
/// image iff `S_s⁻¹(Z) ∈ A`.
pub fn measure_image(region: &dyn Region, map: &PerturbationMap, grid: &GridSpec) -> Result<MeasureEstimate> {
    check_image_fits(region, map, grid)?;
    map.check_budget()?;
    Ok(measure_set(|z| pullback_contains(map, region, z), grid))
}

/// `ω_n·(√n/2)^n`, or `2π` in the plane.
pub fn distortion_constant(n: usize) -> f64 {
    if n == 2 {
        2.0 * std::f64::consts::PI
    } else {
        unit_ball_volume(n) * (0.5 * (n as f64).sqrt()).powi(n as i32)
    }
}

/// `(c_n, C_n)` with `c_n·μ(S_s A) ≤ μ(A) ≤ C_n·μ(S_s A)`.
pub fn distortion_factors(n: usize, q: f64) -> (f64, f64) {
    let d = distortion_constant(n);
    let ni = n as i32;
    (1.0 / (d * (1.0 + q).powi(ni)), d / (1.0 - q).powi(ni))
}

/// The averaged weak-type constant `d_n²(1+TK)^n/(1−TK)^n`; `36π²` at
/// `n = 2`, `TK = 1/2`.
pub fn weak_type_constant(n: usize, tk: f64) -> f64 {
    let d = distortion_constant(n);
    let ni = n as i32;
    d * d * (1.0 + tk).powi(ni) / (1.0 - tk).powi(ni)
}

/// Bound on `‖M_t‖_{p→p}^p`: `2π/(1 − tK)` in the plane, generalized as
/// `d_n·∫₀¹ (1 − x·tK)^{−n} dx`.
pub fn lp_operator_bound(n: usize, tk: f64) -> f64 {
    let g = if tk == 0.0 {
        1.0
    } else if n == 1 {
        -(1.0 - tk).ln() / tk
    } else {
        let m = (n - 1) as f64;
        ((1.0 - tk).powf(-m) - 1.0) / (m * tk)
    };
    distortion_constant(n) * g
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionReport {
    pub measure: MeasureEstimate,
    pub image_measure: MeasureEstimate,
    pub q: f64,
    pub lower_factor: f64,
    pub upper_factor: f64,
    pub slack: f64,
    /// `μ(A) − c_n·μ(S_s A) + slack ≥ 0`.
    pub lower_margin: f64,
    /// `C_n·μ(S_s A) − μ(A) + slack ≥ 0`.
    pub upper_margin: f64,
    pub pass: bool,
}

pub fn check_distortion(region: &dyn Region, map: &PerturbationMap, grid: &GridSpec) -> Result<DistortionReport> {
    let image = measure_image(region, map, grid)?;
    let base = measure_set(|x| region.contains(x), grid);
    let q = map.contraction_q();
    let (lower, upper) = distortion_factors(grid.dim(), q);
    let slack = base.error_bound + image.error_bound;
    let lower_margin = base.value - lower * image.value + slack;
    let upper_margin = upper * image.value - base.value + slack;
    Ok(DistortionReport {
        measure: base,
        image_measure: image,
        q,
        lower_factor: lower,
        upper_factor: upper,
        slack,
        lower_margin,
        upper_margin,
        pass: lower_margin >= 0.0 && upper_margin >= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::UnitVectorField;
    use crate::perturb::SolverSpec;
    use crate::point::BoxRegion;

    fn grid(res: usize) -> GridSpec {
        GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), res).unwrap()
    }

    fn map(field: UnitVectorField, s: f64) -> PerturbationMap {
        PerturbationMap::new(field, s, SolverSpec::default()).unwrap()
    }

    #[test]
    fn zero_shift_matches_plain_measure() {
        let a = BoxRegion::unit(2).unwrap();
        let m = map(UnitVectorField::shear(2, 1.0).unwrap(), 0.0);
        let img = measure_image(&a, &m, &grid(256)).unwrap();
        let base = measure_set(|x| a.contains(x), &grid(256));
        assert_eq!(img.value, base.value);
    }

    #[test]
    fn translation_preserves_measure() {
        let a = BoxRegion::unit(2).unwrap();
        let m = map(UnitVectorField::constant(2, 0.0).unwrap(), 0.5);
        let g = grid(256);
        // A shift by a whole number of cells is exact on the grid.
        assert_eq!(measure_image(&a, &m, &g).unwrap().value, measure_set(|x| a.contains(x), &g).value);
    }

    #[test]
    fn shear_jacobian() {
        let a = BoxRegion::unit(2).unwrap();
        let m = map(UnitVectorField::shear(2, 1.0).unwrap(), 0.4);
        let est = measure_image(&a, &m, &grid(1024)).unwrap();
        let exact = 1.0 - 0.4 * (1.0 - 1f64.cos());
        assert!((est.value - exact).abs() < 0.01 * exact, "{est:?}");
    }

    #[test]
    fn image_must_fit() {
        let a = BoxRegion::centered(2, 1.9).unwrap();
        let m = map(UnitVectorField::constant(2, 0.0).unwrap(), 0.5);
        assert!(matches!(measure_image(&a, &m, &grid(64)), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn planar_constants() {
        let (lo, hi) = distortion_factors(2, 0.25);
        assert!((hi - 2.0 * std::f64::consts::PI / 0.5625).abs() < 1e-12);
        assert!((lo - 1.0 / (2.0 * std::f64::consts::PI * 1.5625)).abs() < 1e-12);
        let c = weak_type_constant(2, 0.5);
        assert!((c - 36.0 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
        assert!((lp_operator_bound(2, 0.5) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn operator_bound_is_continuous_in_tk() {
        for n in [1, 3, 4] {
            let at0 = lp_operator_bound(n, 0.0);
            let near = lp_operator_bound(n, 1e-9);
            assert!((at0 - near).abs() < 1e-6 * at0, "n = {n}");
        }
    }

    #[test]
    fn distortion_passes_for_shear() {
        let a = BoxRegion::unit(2).unwrap();
        let m = map(UnitVectorField::shear(2, 1.0).unwrap(), 0.25);
        let r = check_distortion(&a, &m, &grid(512)).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
