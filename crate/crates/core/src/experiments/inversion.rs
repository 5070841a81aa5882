use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{task_rng, Cell, ExperimentReport, Verdict};
use crate::error::{Error, Result};
use crate::fields::{estimate_lipschitz, uniform_in_box, PairSampler, UnitVectorField};
use crate::perturb::{PerturbationMap, SolverSpec};
use crate::point::{BoxRegion, Point};

#[derive(Clone, Debug, Serialize)]
pub struct InvertCheckConfig {
    /// Target contraction factors; `s = q/K` (or `s = q` for constant fields,
    /// where `q` stays 0).
    pub q_values: Vec<f64>,
    pub points: usize,
    pub pairs: usize,
    pub lipschitz_pairs: usize,
    pub region: BoxRegion,
    pub solver: SolverSpec,
    pub seed: u64,
    /// Absolute slack on the `(1 ± q)` sandwich.
    pub sandwich_tolerance: f64,
    /// Absolute slack on the pushforward Lipschitz bound.
    pub lipschitz_tolerance: f64,
}

impl InvertCheckConfig {
    pub fn default_suite(dim: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            q_values: vec![0.0, 0.25, 0.5, 0.9],
            points: 10_000,
            pairs: 10_000,
            lipschitz_pairs: 100_000,
            region: BoxRegion::centered(dim, 2.0)?,
            solver: SolverSpec::default(),
            seed,
            sandwich_tolerance: 1e-12,
            lipschitz_tolerance: 1e-6,
        })
    }
}

/// Round-trip accuracy of `S_s⁻¹`, the bi-Lipschitz sandwich of `S_s`, and
/// the Lipschitz constant of the pushforward field `v∘S_s⁻¹`.
pub fn run_invert_check(fields: &[UnitVectorField], cfg: &InvertCheckConfig) -> Result<ExperimentReport> {
    if cfg.q_values.iter().any(|q| !(*q >= 0.0 && *q < 1.0)) {
        return Err(Error::InvalidParameter {
            name: "q_values",
            reason: "contraction factors must lie in [0, 1)".into(),
        });
    }
    let inputs = json!({
        "fields": fields.iter().map(|v| v.descriptor().to_string()).collect::<Vec<_>>(),
        "config": cfg,
    });
    let mut report = ExperimentReport::new(
        "invert-check",
        inputs,
        &[
            "field",
            "s",
            "q",
            "max_roundtrip",
            "max_iterations",
            "sandwich_violations",
            "pushforward_lipschitz",
            "pushforward_bound",
        ],
    );
    let tol = cfg.solver.tolerance;
    for (fi, v) in fields.iter().enumerate() {
        if v.dimension() != cfg.region.dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.region.dim(),
                got: v.dimension(),
            });
        }
        let k = v.lipschitz_k();
        for (qi, &q_target) in cfg.q_values.iter().enumerate() {
            let s = if k > 0.0 { q_target / k } else { q_target };
            let map = PerturbationMap::new(v.clone(), s, cfg.solver)?;
            let q = map.contraction_q();
            let stream = ((fi * cfg.q_values.len() + qi) as u64) << 8;

            let mut rng = task_rng(cfg.seed, stream);
            let points: Vec<Point> = (0..cfg.points).map(|_| uniform_in_box(&cfg.region, &mut rng)).collect();
            let results = points
                .par_iter()
                .map(|x| {
                    let inv = map.invert_detailed(&map.apply(x))?;
                    Ok((inv.point.dist(x), inv.iterations))
                })
                .collect::<Result<Vec<_>>>()?;
            let max_rt = results.iter().map(|r| r.0).fold(0.0, f64::max);
            let max_it = results.iter().map(|r| r.1).max().unwrap_or(0);

            // Half the pairs independent, half at short range where the
            // lower bound is nearly attained.
            let mut rng = task_rng(cfg.seed, stream + 1);
            let mut violations = 0usize;
            let mut sandwich_margin = f64::INFINITY;
            for i in 0..cfg.pairs {
                let x = uniform_in_box(&cfg.region, &mut rng);
                let y = if i % 2 == 0 {
                    uniform_in_box(&cfg.region, &mut rng)
                } else {
                    let mut d = Point::zeros(x.dim());
                    for c in d.as_mut_slice() {
                        *c = rng.gen_range(-1e-3..1e-3);
                    }
                    x + d
                };
                let d = x.dist(&y);
                if d == 0.0 {
                    continue;
                }
                let img = map.apply(&x).dist(&map.apply(&y));
                let lo = (1.0 - q) * d - cfg.sandwich_tolerance;
                let hi = (1.0 + q) * d + cfg.sandwich_tolerance;
                sandwich_margin = sandwich_margin.min(img - lo).min(hi - img);
                if img < lo || img > hi {
                    violations += 1;
                }
            }

            let w = map.pushforward_field()?;
            let bound = k / (1.0 - q);
            let sampler = PairSampler::local(cfg.region, cfg.lipschitz_pairs, 0.05);
            let est = estimate_lipschitz(&w, &sampler, cfg.seed ^ (stream + 2));

            report.push_row(vec![
                Cell::from(v.descriptor().to_string()),
                s.into(),
                q.into(),
                max_rt.into(),
                max_it.into(),
                violations.into(),
                est.into(),
                bound.into(),
            ]);
            let rt_limit = if q == 0.0 { 1e-15 } else { 2.0 * tol };
            report.verdict(Verdict::at_most(
                format!("round trip {} q={q}: error <= {rt_limit:e}", v.descriptor()),
                max_rt,
                rt_limit,
            ));
            report.verdict(Verdict::new(
                format!("bi-Lipschitz sandwich {} q={q}: no violations", v.descriptor()),
                violations == 0,
                sandwich_margin,
            ));
            report.verdict(Verdict::at_most(
                format!("pushforward Lipschitz {} q={q}: estimate <= K/(1-q)", v.descriptor()),
                est,
                bound + cfg.lipschitz_tolerance,
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_roundtrip_is_exact_to_rounding() {
        let mut cfg = InvertCheckConfig::default_suite(2, 1).unwrap();
        cfg.points = 500;
        cfg.pairs = 500;
        cfg.lipschitz_pairs = 500;
        let r = run_invert_check(&[UnitVectorField::constant(2, 0.7).unwrap()], &cfg).unwrap();
        assert!(r.passed(), "{:?}", r.summary_lines());
        assert!(r.column("max_roundtrip").unwrap().iter().all(|e| *e <= 1e-15));
    }

    #[test]
    fn shear_suite_passes() {
        let mut cfg = InvertCheckConfig::default_suite(2, 2).unwrap();
        cfg.points = 500;
        cfg.pairs = 500;
        cfg.lipschitz_pairs = 2000;
        let r = run_invert_check(&[UnitVectorField::shear(2, 1.0).unwrap()], &cfg).unwrap();
        assert!(r.passed(), "{:?}", r.summary_lines());
    }
}
