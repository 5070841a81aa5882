use serde::Serialize;
use serde_json::json;

use super::{grid_sum, Cell, ExperimentReport, Verdict};
use crate::averaging::{average_on, Integrand};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, UnitVectorField};
use crate::measure::{lp_operator_bound, GridSpec};
use crate::quadrature::QuadratureSpec;

#[derive(Clone, Debug, Serialize)]
pub struct NormConvergenceConfig {
    pub p: f64,
    /// Strictly decreasing.
    pub t_values: Vec<f64>,
    pub grid: GridSpec,
    pub quad: QuadratureSpec,
    /// The last error must be at most this multiple of `‖F‖_p`.
    pub relative_floor: f64,
    /// Optional bounds for `error(t_i)/error(t_{i+1})`.
    pub ratio_band: Option<(f64, f64)>,
}

impl NormConvergenceConfig {
    pub fn new(p: f64, t_values: Vec<f64>, grid: GridSpec) -> Self {
        Self {
            p,
            t_values,
            grid,
            quad: QuadratureSpec::default(),
            relative_floor: 0.1,
            ratio_band: None,
        }
    }
}

fn validate(f: &ScalarField, v: &UnitVectorField, cfg: &NormConvergenceConfig) -> Result<()> {
    let p = cfg.p;
    if p.is_infinite() {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "norm convergence holds only for finite p".into(),
        });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("must be at least 1, got {p}"),
        });
    }
    let n = cfg.grid.dim();
    if f.dimension() != n || v.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if f.dimension() != n { f.dimension() } else { v.dimension() },
        });
    }
    if let Some(gamma) = f.singularity_exponent() {
        if gamma * p >= n as f64 {
            return Err(Error::Precondition(format!(
                "F is not in L^{p}: singularity exponent {gamma} needs gamma*p < {n}"
            )));
        }
    }
    if cfg.t_values.is_empty()
        || cfg.t_values.iter().any(|t| !(*t > 0.0 && t.is_finite()))
        || cfg.t_values.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter {
            name: "t_values",
            reason: "must be a nonempty strictly decreasing list of positive radii".into(),
        });
    }
    if f.sup_abs() > 0.0 {
        let support = f.support_box().ok_or_else(|| {
            Error::Precondition("F must have compact support for grid norms".into())
        })?;
        let needed = support.inflate(cfg.t_values[0]);
        if !cfg.grid.bounds.contains_box(&needed) || cfg.grid.mask.is_some() {
            return Err(Error::BoxTooSmall {
                needed_lo: needed.lo.as_slice().to_vec(),
                needed_hi: needed.hi.as_slice().to_vec(),
            });
        }
    }
    Ok(())
}

/// `‖M_t F − F‖_p` and `‖M_t F‖_p` by midpoint quadrature on `cfg.grid`.
pub fn run_norm_convergence(f: &ScalarField, v: &UnitVectorField, cfg: &NormConvergenceConfig) -> Result<ExperimentReport> {
    validate(f, v, cfg)?;
    let p = cfg.p;
    let grid = &cfg.grid;
    let n = grid.dim();
    let k = v.lipschitz_k();
    let vol = grid.cell_volume();
    let pow = |x: f64| if p == 1.0 { x.abs() } else { x.abs().powf(p) };

    let inputs = json!({
        "field": v.descriptor().to_string(),
        "scalar": f.descriptor().to_string(),
        "config": cfg,
    });
    let mut report = ExperimentReport::new(
        "norm-convergence",
        inputs,
        &["t", "error", "mt_norm", "mt_norm_pow", "operator_bound", "ratio"],
    );

    let [f_grid] = grid_sum(grid, |x| [pow(f.eval(x))]);
    let f_grid = f_grid * vol;
    let f_pow = f.lp_norm(p).map_or(f_grid, |nrm| nrm.powf(p));
    let f_norm = f_pow.powf(1.0 / p);
    let norm_slack = (f_grid - f_pow).abs() + 1e-12;
    report.note(format!(
        "||F||_p^p: reference {f_pow:.10e}, grid {f_grid:.10e}; slack {norm_slack:.3e}"
    ));

    let table = cfg.quad.table(cfg.quad.nodes);
    let mut errors = Vec::with_capacity(cfg.t_values.len());
    let mut bound_margin = f64::INFINITY;
    for &t in &cfg.t_values {
        let [err_pow, mt_pow] = grid_sum(grid, |x| {
            if f.ball_sup_abs(x, t) == 0.0 {
                return [0.0, 0.0];
            }
            let fx = f.eval(x);
            let mt = average_on(&table, f, x, &v.eval(x), t, Integrand::Signed);
            [pow(mt - fx), pow(mt)]
        });
        let (err_pow, mt_pow) = (err_pow * vol, mt_pow * vol);
        let error = err_pow.powf(1.0 / p);
        let tk = t * k;
        let bound = if tk < 1.0 { lp_operator_bound(n, tk) } else { f64::INFINITY };
        bound_margin = bound_margin.min(bound * f_pow + norm_slack - mt_pow);
        let ratio = errors.last().map_or(f64::NAN, |prev: &f64| prev / error);
        report.push_row(vec![
            Cell::from(t),
            error.into(),
            mt_pow.powf(1.0 / p).into(),
            mt_pow.into(),
            bound.into(),
            ratio.into(),
        ]);
        errors.push(error);
    }

    let decrease = errors.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let decrease = if decrease.is_infinite() { 0.0 } else { decrease };
    report.verdict(Verdict::new("error nonincreasing as t decreases", decrease >= 0.0, decrease));
    let last = *errors.last().expect("nonempty t_values");
    report.verdict(Verdict::at_most(
        format!("final error <= {} * ||F||_p", cfg.relative_floor),
        last,
        cfg.relative_floor * f_norm,
    ));
    if let Some(lip) = f.lipschitz() {
        let margin = cfg
            .t_values
            .iter()
            .zip(&errors)
            .map(|(t, e)| lip * t * 1.1 - e)
            .fold(f64::INFINITY, f64::min);
        report.verdict(Verdict::new("error <= 1.1 * Lip(F) * t", margin >= 0.0, margin));
    }
    report.verdict(Verdict::new(
        "||M_t F||_p^p <= operator bound * ||F||_p^p + slack",
        bound_margin >= 0.0,
        bound_margin,
    ));
    if let Some((lo, hi)) = cfg.ratio_band {
        if errors.iter().all(|e| *e > 0.0) {
            let margin = errors
                .windows(2)
                .map(|w| {
                    let r = w[0] / w[1];
                    (r - lo).min(hi - r)
                })
                .fold(f64::INFINITY, f64::min);
            report.verdict(Verdict::new(
                format!("halving ratio within [{lo}, {hi}]"),
                margin >= 0.0,
                margin,
            ));
        } else {
            report.note("ratio band not evaluated: some errors vanish");
        }
    }
    report.summary = json!({ "lp_norm": f_norm, "errors": errors, "lipschitz_k": k });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::{BoxRegion, Point};

    fn grid(res: usize) -> GridSpec {
        GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), res).unwrap()
    }

    #[test]
    fn zero_field_has_zero_errors() {
        let f = ScalarField::zero(2).unwrap();
        let v = UnitVectorField::shear(2, 1.0).unwrap();
        let cfg = NormConvergenceConfig::new(1.0, vec![0.2, 0.1], grid(64));
        let r = run_norm_convergence(&f, &v, &cfg).unwrap();
        assert!(r.column("error").unwrap().iter().all(|e| *e == 0.0));
        assert!(r.passed(), "{:?}", r.summary_lines());
    }

    #[test]
    fn infinite_p_rejected() {
        let f = ScalarField::zero(2).unwrap();
        let v = UnitVectorField::constant(2, 0.0).unwrap();
        let cfg = NormConvergenceConfig::new(f64::INFINITY, vec![0.1], grid(64));
        assert!(run_norm_convergence(&f, &v, &cfg).is_err());
    }

    #[test]
    fn indicator_error_is_about_t() {
        let f = ScalarField::indicator(BoxRegion::unit(2).unwrap());
        let v = UnitVectorField::constant(2, 0.0).unwrap();
        let mut cfg = NormConvergenceConfig::new(1.0, vec![0.2, 0.1], grid(800));
        cfg.quad = QuadratureSpec::midpoint(400).unwrap();
        let r = run_norm_convergence(&f, &v, &cfg).unwrap();
        for (t, e) in r.column("t").unwrap().iter().zip(r.column("error").unwrap()) {
            assert!((e - t).abs() < 0.02 * t, "t = {t}, error = {e}");
        }
    }

    #[test]
    fn bump_converges() {
        let f = ScalarField::bump(Point::zeros(2), 0.25).unwrap().normalized_l1().unwrap();
        let v = UnitVectorField::shear(2, 1.0).unwrap();
        let cfg = NormConvergenceConfig::new(1.0, vec![0.2, 0.1, 0.05], grid(256));
        let r = run_norm_convergence(&f, &v, &cfg).unwrap();
        assert!(r.passed(), "{:?}", r.summary_lines());
    }
}
