use crate::averaging::{MaximalPlan, MaximalSpec};
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::perturb::PerturbationMap;
use crate::quadrature::QuadratureSpec;

use super::grid::{GridSpec, MeasureEstimate, SampledGrid};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && !lambda.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive, got {lambda}"),
        })
    }
}

/// Samples `M_*^s(F)` over `window`. Values at or below `floor` may be
/// replaced by an upper bound that is still `≤ floor`, so superlevel sets
/// for `λ ≥ floor` are exact.
pub fn sample_maximal(
    f: &ScalarField,
    map: &PerturbationMap,
    window: &GridSpec,
    maximal: &MaximalSpec,
    quad: &QuadratureSpec,
    floor: f64,
) -> Result<SampledGrid> {
    if f.dimension() != window.dim() || map.dimension() != window.dim() {
        return Err(Error::DimensionMismatch {
            expected: window.dim(),
            got: if f.dimension() != window.dim() {
                f.dimension()
            } else {
                map.dimension()
            },
        });
    }
    map.check_budget()?;
    let plan = MaximalPlan::new(maximal, quad);
    Ok(SampledGrid::sample(window, |x| plan.at_above(f, map, x, floor)))
}

/// `μ{X ∈ window : M_*^s(F)(X) > λ}`.
pub fn level_set_measure(
    f: &ScalarField,
    map: &PerturbationMap,
    lambda: f64,
    window: &GridSpec,
    maximal: &MaximalSpec,
    quad: &QuadratureSpec,
) -> Result<MeasureEstimate> {
    Ok(level_set_measures(f, map, &[lambda], window, maximal, quad)?[0])
}

/// Several thresholds from one sampling pass.
pub fn level_set_measures(
    f: &ScalarField,
    map: &PerturbationMap,
    lambdas: &[f64],
    window: &GridSpec,
    maximal: &MaximalSpec,
    quad: &QuadratureSpec,
) -> Result<Vec<MeasureEstimate>> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    let floor = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return Ok(Vec::new());
    }
    let sampled = sample_maximal(f, map, window, maximal, quad, floor)?;
    Ok(lambdas.iter().map(|&l| sampled.superlevel(l)).collect())
}
