use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{check_t_bound, task_rng, Cell, ExperimentReport, Verdict};
use crate::averaging::{m_t_pushforward, m_t_shifted, Integrand};
use crate::error::{Error, Result};
use crate::fields::{uniform_in_box, ScalarField, UnitVectorField};
use crate::perturb::{PerturbationMap, SolverSpec};
use crate::point::{BoxRegion, Point};
use crate::quadrature::QuadratureSpec;

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseConfig {
    pub t_bound: f64,
    pub s_samples: usize,
    pub x_samples: usize,
    pub region: BoxRegion,
    /// Strictly decreasing; the last entry is the scale that is judged.
    pub t_values: Vec<f64>,
    pub quad: QuadratureSpec,
    pub solver: SolverSpec,
    pub seed: u64,
    /// Continuous `F`: errors must stay below this multiple of the
    /// modulus of continuity at the finest scale.
    pub continuity_factor: f64,
    /// Discontinuous `F`: error threshold and allowed failure fraction.
    pub jump_tolerance: f64,
    pub max_failure_fraction: f64,
}

impl PointwiseConfig {
    /// 8 shifts, 1000 points in `[−2, 2]ⁿ`, `t ∈ {0.1, 0.01, 0.001}`.
    pub fn default_suite(dim: usize, t_bound: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            t_bound,
            s_samples: 8,
            x_samples: 1000,
            region: BoxRegion::centered(dim, 2.0)?,
            t_values: vec![0.1, 0.01, 0.001],
            quad: QuadratureSpec::default(),
            solver: SolverSpec::default(),
            seed,
            continuity_factor: 10.0,
            jump_tolerance: 0.01,
            max_failure_fraction: 0.05,
        })
    }
}

/// Sampled modulus of continuity `sup_{|X−Y| ≤ t} |F(X) − F(Y)|`: exact via
/// the Lipschitz constant when declared, otherwise a lower estimate from
/// random pairs.
fn modulus(f: &ScalarField, region: &BoxRegion, t: f64, seed: u64) -> f64 {
    if let Some(l) = f.lipschitz() {
        return l * t;
    }
    let mut rng = task_rng(seed, u64::MAX);
    let n = region.dim();
    let mut worst = 0.0_f64;
    for _ in 0..20_000 {
        let x = uniform_in_box(region, &mut rng);
        let mut dir = Point::zeros(n);
        for c in dir.as_mut_slice() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let norm = dir.norm();
        if norm == 0.0 {
            continue;
        }
        let y = x.offset(t * rng.gen::<f64>() / norm, &dir);
        worst = worst.max((f.eval(&x) - f.eval(&y)).abs());
    }
    worst
}

/// Probes a.e. convergence of the pushforward and shifted averages at
/// random shifts and points.
pub fn run_pointwise(f: &ScalarField, v: &UnitVectorField, cfg: &PointwiseConfig) -> Result<ExperimentReport> {
    let n = f.dimension();
    if v.dimension() != n || cfg.region.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if v.dimension() != n { v.dimension() } else { cfg.region.dim() },
        });
    }
    check_t_bound(cfg.t_bound, v.lipschitz_k())?;
    if cfg.t_values.is_empty()
        || cfg.t_values.iter().any(|t| !(*t > 0.0))
        || cfg.t_values.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter {
            name: "t_values",
            reason: "must be a nonempty strictly decreasing list of positive radii".into(),
        });
    }
    if cfg.s_samples == 0 || cfg.x_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "need at least one shift and one point".into(),
        });
    }

    let mut srng = task_rng(cfg.seed, 0);
    let half = 0.5 * cfg.t_bound;
    let shifts: Vec<f64> = (0..cfg.s_samples).map(|_| srng.gen_range(-half..=half)).collect();
    let mut xrng = task_rng(cfg.seed, 1);
    let points: Vec<Point> = (0..cfg.x_samples).map(|_| uniform_in_box(&cfg.region, &mut xrng)).collect();
    let t_min = *cfg.t_values.last().expect("nonempty");

    let inputs = json!({
        "field": v.descriptor().to_string(),
        "scalar": f.descriptor().to_string(),
        "config": cfg,
    });
    let mut columns: Vec<String> = vec!["s".into(), "point".into()];
    columns.extend((0..n).map(|i| format!("x{i}")));
    columns.push("error_pushforward".into());
    columns.push("error_shifted".into());
    let mut report = ExperimentReport::new("pointwise", inputs, &[]);
    report.columns = columns;
    report.provenance.sampled_shifts = true;
    report
        .provenance
        .notes
        .push(format!("{} random shifts probe the full-measure set of good s", cfg.s_samples));

    let mut finest = Vec::with_capacity(shifts.len() * points.len());
    let mut per_t_max = vec![(0.0_f64, 0.0_f64); cfg.t_values.len()];
    for &s in &shifts {
        let map = PerturbationMap::new(v.clone(), s, cfg.solver)?;
        let errs = points
            .par_iter()
            .map(|x| {
                let fx = f.eval(x);
                let fs = f.eval(&x.offset(s, &v.eval(x)));
                cfg.t_values
                    .iter()
                    .map(|&t| {
                        let push = m_t_pushforward(f, &map, x, t, &cfg.quad, Integrand::Signed)?;
                        let shifted = m_t_shifted(f, v, x, s, t, &cfg.quad)?;
                        Ok(((push - fx).abs(), (shifted - fs).abs()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, (x, e)) in points.iter().zip(&errs).enumerate() {
            for (m, &(a, b)) in per_t_max.iter_mut().zip(e) {
                m.0 = m.0.max(a);
                m.1 = m.1.max(b);
            }
            let (a, b) = *e.last().expect("nonempty");
            let mut row = vec![Cell::from(s), i.into()];
            row.extend(x.as_slice().iter().map(|&c| Cell::from(c)));
            row.push(a.into());
            row.push(b.into());
            report.push_row(row);
            finest.push((a, b));
        }
    }

    let total = finest.len() as f64;
    if f.is_continuous() {
        let eps = cfg.continuity_factor * modulus(f, &cfg.region, t_min, cfg.seed);
        report.note(format!("continuous F: threshold {eps:.6e} at t = {t_min}"));
        let worst_push = finest.iter().map(|e| e.0).fold(0.0, f64::max);
        let worst_shift = finest.iter().map(|e| e.1).fold(0.0, f64::max);
        report.verdict(Verdict::at_most("pushforward: no error above the continuity threshold", worst_push, eps));
        report.verdict(Verdict::at_most("shifted: no error above the continuity threshold", worst_shift, eps));
    } else {
        let tol = cfg.jump_tolerance;
        let frac_push = finest.iter().filter(|e| e.0 > tol).count() as f64 / total;
        let frac_shift = finest.iter().filter(|e| e.1 > tol).count() as f64 / total;
        report.note(format!(
            "discontinuous F: failure fractions {frac_push:.4} (pushforward), {frac_shift:.4} (shifted) at t = {t_min}"
        ));
        report.verdict(Verdict::at_most(
            format!("pushforward: fraction of errors > {tol} is at most {}", cfg.max_failure_fraction),
            frac_push,
            cfg.max_failure_fraction,
        ));
        report.verdict(Verdict::at_most(
            format!("shifted: fraction of errors > {tol} is at most {}", cfg.max_failure_fraction),
            frac_shift,
            cfg.max_failure_fraction,
        ));
    }
    report.summary = json!({
        "shifts": shifts,
        "t_values": cfg.t_values,
        "max_error_pushforward": per_t_max.iter().map(|m| m.0).collect::<Vec<_>>(),
        "max_error_shifted": per_t_max.iter().map(|m| m.1).collect::<Vec<_>>(),
    });
    Ok(report)
}
