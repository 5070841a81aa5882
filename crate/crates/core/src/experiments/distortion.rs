use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::{task_rng, Cell, ExperimentReport, Verdict};
use crate::error::Result;
use crate::fields::UnitVectorField;
use crate::measure::{check_distortion, measure_image, GridSpec};
use crate::perturb::{PerturbationMap, SolverSpec};
use crate::point::{BoxRegion, Point};

#[derive(Clone, Debug, Serialize)]
pub struct DistortionConfig {
    pub s_values: Vec<f64>,
    pub rectangles: usize,
    /// Rectangles are drawn inside this box.
    pub placement: BoxRegion,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub seed: u64,
    /// Also compare the shear image of the unit square with its closed form.
    pub jacobian_check: bool,
}

impl DistortionConfig {
    /// 20 rectangles in `[−1.5, 1.5]²`, `s ∈ {±T/4, ±0.45·T}`, grid
    /// `[−2, 2]²` at resolution 1024.
    pub fn default_suite(t_bound: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            s_values: vec![-0.25 * t_bound, 0.25 * t_bound, -0.45 * t_bound, 0.45 * t_bound],
            rectangles: 20,
            placement: BoxRegion::centered(2, 1.5)?,
            grid: GridSpec::new(BoxRegion::centered(2, 2.0)?, 1024)?,
            solver: SolverSpec::default(),
            seed,
            jacobian_check: true,
        })
    }
}

fn random_rectangle(placement: &BoxRegion, rng: &mut impl Rng) -> Result<BoxRegion> {
    let n = placement.dim();
    let mut lo = Point::zeros(n);
    let mut hi = Point::zeros(n);
    for i in 0..n {
        let (a, b) = (placement.lo[i], placement.hi[i]);
        let len = rng.gen_range(0.05..=0.5) * (b - a);
        let start = rng.gen_range(a..=b - len);
        lo.as_mut_slice()[i] = start;
        hi.as_mut_slice()[i] = start + len;
    }
    BoxRegion::new(lo, hi)
}

/// `μ(S_s(A))` against `μ(A)` for random rectangles: both distortion
/// inequalities must hold up to the summed grid error bounds.
pub fn run_distortion_sweep(fields: &[UnitVectorField], cfg: &DistortionConfig) -> Result<ExperimentReport> {
    let inputs = json!({
        "fields": fields.iter().map(|v| v.descriptor().to_string()).collect::<Vec<_>>(),
        "config": cfg,
    });
    let mut report = ExperimentReport::new(
        "distortion",
        inputs,
        &[
            "field",
            "s",
            "rectangle",
            "measure",
            "image_measure",
            "lower_factor",
            "upper_factor",
            "slack",
            "pass",
        ],
    );
    let mut rng = task_rng(cfg.seed, 0);
    let rects = (0..cfg.rectangles)
        .map(|_| random_rectangle(&cfg.placement, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    for v in fields {
        let mut margin = f64::INFINITY;
        let mut failures = 0usize;
        for &s in &cfg.s_values {
            let map = PerturbationMap::new(v.clone(), s, cfg.solver)?;
            for (i, a) in rects.iter().enumerate() {
                let r = check_distortion(a, &map, &cfg.grid)?;
                margin = margin.min(r.lower_margin).min(r.upper_margin);
                failures += usize::from(!r.pass);
                report.push_row(vec![
                    Cell::from(v.descriptor().to_string()),
                    s.into(),
                    i.into(),
                    r.measure.value.into(),
                    r.image_measure.value.into(),
                    r.lower_factor.into(),
                    r.upper_factor.into(),
                    r.slack.into(),
                    usize::from(r.pass).into(),
                ]);
            }
        }
        report.verdict(Verdict::new(
            format!(
                "distortion sandwich {}: {} cases, {failures} failures",
                v.descriptor(),
                cfg.s_values.len() * rects.len()
            ),
            failures == 0,
            margin,
        ));
    }
    if cfg.jacobian_check && cfg.grid.dim() == 2 {
        let (a, s) = (1.0, 0.4);
        let map = PerturbationMap::new(UnitVectorField::shear(2, a)?, s, cfg.solver)?;
        let est = measure_image(&BoxRegion::unit(2)?, &map, &cfg.grid)?;
        let exact = 1.0 - s * (1.0 - a.cos());
        let rel = (est.value - exact).abs() / exact;
        report.note(format!(
            "shear a={a} s={s}: image measure {:.6} vs closed form {exact:.6}",
            est.value
        ));
        report.verdict(Verdict::at_most("shear image of the unit square within 1% of 1 - s(1 - cos a)", rel, 0.01));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes() {
        let mut cfg = DistortionConfig::default_suite(0.5, 4).unwrap();
        cfg.rectangles = 3;
        cfg.grid = GridSpec::new(BoxRegion::centered(2, 2.0).unwrap(), 256).unwrap();
        cfg.jacobian_check = false;
        let r = run_distortion_sweep(&[UnitVectorField::shear(2, 1.0).unwrap()], &cfg).unwrap();
        assert_eq!(r.rows.len(), 12);
        assert!(r.passed(), "{:?}", r.summary_lines());
    }
}
