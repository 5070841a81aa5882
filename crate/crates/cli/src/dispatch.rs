use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dirdiff::averaging::MaximalSpec;
use dirdiff::experiments::{
    run_c_alpha, run_continuity_in_s, run_covering_demo, run_distortion_sweep, run_h_n_decay, run_invert_check,
    run_norm_convergence, run_pointwise, run_weak_type, CAlphaConfig, ContinuityConfig, DecayConfig,
    DistortionConfig, ExperimentReport, InvertCheckConfig, NormConvergenceConfig, PointwiseConfig, SGrid,
    WeakTypeConfig,
};
use dirdiff::measure::{GridSpec, IntervalCollection};
use dirdiff::point::BoxRegion;
use dirdiff::{Error, Result};
use serde_json::json;

use crate::config::{Command, OutputFormat, RunConfig};

fn single<T: Clone>(items: Vec<T>, key: &str) -> Result<T> {
    match items.len() {
        1 => Ok(items[0].clone()),
        n => Err(Error::Precondition(format!("this command takes exactly one `{key}`, got {n}"))),
    }
}

fn window(cfg: &RunConfig) -> Result<GridSpec> {
    GridSpec::window(cfg.dim, cfg.grid_radius, cfg.grid_resolution)
}

fn maximal(cfg: &RunConfig) -> Result<MaximalSpec> {
    MaximalSpec::new(cfg.maximal_t_max, cfg.maximal_levels)
}

fn run_command(cfg: &RunConfig) -> Result<ExperimentReport> {
    let fields = cfg.vector_fields()?;
    let scalars = cfg.scalar_fields()?;
    match cfg.command {
        Command::InvertCheck => {
            let mut c = InvertCheckConfig::default_suite(cfg.dim, cfg.seed)?;
            c.q_values = cfg.q_values.clone();
            c.points = cfg.points;
            c.pairs = cfg.pairs;
            c.lipschitz_pairs = cfg.lipschitz_pairs;
            c.region = BoxRegion::centered(cfg.dim, cfg.grid_radius)?;
            c.solver = cfg.solver;
            run_invert_check(&fields, &c)
        }
        Command::Distortion => {
            let mut c = DistortionConfig::default_suite(cfg.t_bound, cfg.seed)?;
            c.s_values = cfg.s_values.clone();
            c.rectangles = cfg.rectangles;
            c.grid = GridSpec::new(BoxRegion::centered(2, cfg.grid_radius)?, cfg.grid_resolution)?;
            c.placement = BoxRegion::centered(2, cfg.grid_radius - 0.5 * cfg.t_bound)?;
            c.solver = cfg.solver;
            if cfg.dim != 2 {
                return Err(Error::Precondition("distortion sweeps are planar".into()));
            }
            run_distortion_sweep(&fields, &c)
        }
        Command::NormConvergence => {
            let grid = GridSpec::new(BoxRegion::centered(cfg.dim, cfg.grid_radius)?, cfg.grid_resolution)?;
            let mut c = NormConvergenceConfig::new(cfg.p, cfg.t_values.clone(), grid);
            c.quad = cfg.quad;
            c.relative_floor = cfg.norm_floor;
            c.ratio_band = cfg.ratio_band;
            run_norm_convergence(&single(scalars, "scalar")?, &single(fields, "field")?, &c)
        }
        Command::WeakType => {
            let c = WeakTypeConfig {
                t_bound: cfg.t_bound,
                lambdas: cfg.lambdas.clone(),
                s_grid: SGrid::new(cfg.t_bound, cfg.s_count)?,
                window: window(cfg)?,
                maximal: maximal(cfg)?,
                quad: cfg.quad,
                solver: cfg.solver,
            };
            run_weak_type(&scalars, &fields, &c)
        }
        Command::Pointwise => {
            let mut c = PointwiseConfig::default_suite(cfg.dim, cfg.t_bound, cfg.seed)?;
            c.s_samples = cfg.s_samples;
            c.x_samples = cfg.points;
            c.region = BoxRegion::centered(cfg.dim, cfg.grid_radius)?;
            c.t_values = cfg.t_values.clone();
            c.quad = cfg.quad;
            c.solver = cfg.solver;
            c.continuity_factor = cfg.pointwise_factor;
            c.jump_tolerance = cfg.pointwise_tolerance;
            c.max_failure_fraction = cfg.pointwise_max_fraction;
            run_pointwise(&single(scalars, "scalar")?, &single(fields, "field")?, &c)
        }
        Command::Continuity => {
            let c = ContinuityConfig {
                t_bound: cfg.t_bound,
                lambda: cfg.lambda,
                s_grid: SGrid::new(cfg.t_bound, cfg.s_count)?,
                window: window(cfg)?,
                maximal: maximal(cfg)?,
                quad: cfg.quad,
                solver: cfg.solver,
            };
            run_continuity_in_s(&single(scalars, "scalar")?, &single(fields, "field")?, &c)
        }
        Command::HnDecay => {
            let c = DecayConfig {
                t_bound: cfg.t_bound,
                s_samples: cfg.s_values.clone(),
                n_values: (1..=cfg.n_max).collect(),
                alphas: cfg.alphas.clone(),
                window: window(cfg)?,
                maximal: maximal(cfg)?,
                quad: cfg.quad,
                solver: cfg.solver,
            };
            run_h_n_decay(&scalars, &single(fields, "field")?, &c)
        }
        Command::CAlpha => {
            let c = CAlphaConfig {
                t_bound: cfg.t_bound,
                s_samples: cfg.s_values.clone(),
                alpha: cfg.alpha,
                n_max: cfg.n_max,
                lambdas: cfg.lambdas.clone(),
                scales: cfg.scales.clone(),
                window: window(cfg)?,
                maximal: maximal(cfg)?,
                quad: cfg.quad,
                solver: cfg.solver,
            };
            run_c_alpha(&scalars, &single(fields, "field")?, &c)
        }
        Command::CoveringDemo => {
            let collection = IntervalCollection::from_pairs(&cfg.intervals)?;
            run_covering_demo(&collection, cfg.c)
        }
    }
}

/// Runs the configured command. Runtime failures become a report whose
/// `error` field is set.
pub fn dispatch(cfg: &RunConfig) -> ExperimentReport {
    let config_text = cfg.to_text();
    let mut report = match run_command(cfg) {
        Ok(r) => r,
        Err(e) => ExperimentReport::failed(cfg.command.name(), json!({}), &e),
    };
    let runner_inputs = std::mem::take(&mut report.inputs);
    report.inputs = json!({ "config": config_text, "seed": cfg.seed, "runner": runner_inputs });
    report
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes the report files and returns the paths written. `-` sends the
/// output to `stdout` instead.
pub fn write_report(report: &ExperimentReport, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    let to_stdout = cfg.output_path.as_os_str() == "-";
    let mut written = Vec::new();
    let want_json = matches!(cfg.output_format, OutputFormat::Json | OutputFormat::Both);
    let want_csv = matches!(cfg.output_format, OutputFormat::Csv | OutputFormat::Both);
    if want_json {
        let text = report.to_json()? + "\n";
        if to_stdout {
            stdout.write_all(text.as_bytes()).map_err(io)?;
        } else {
            let p = with_extension(&cfg.output_path, "json");
            fs::write(&p, text).map_err(io)?;
            written.push(p);
        }
    }
    if want_csv {
        let text = report.to_csv()?;
        if to_stdout {
            stdout.write_all(text.as_bytes()).map_err(io)?;
        } else {
            let p = with_extension(&cfg.output_path, "csv");
            fs::write(&p, text).map_err(io)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Dispatch, write, print the verdict summary; returns the exit code
/// (0 iff every verdict passes).
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> i32 {
    let _ = writeln!(stdout, "stage: run {}", cfg.command.name());
    let report = dispatch(cfg);
    if cfg.command == Command::CoveringDemo {
        if let Some(sel) = report.summary.get("selected").and_then(|s| s.as_array()) {
            let parts: Vec<String> = sel
                .iter()
                .filter_map(|p| Some(format!("({},{})", p.get(0)?.as_f64()?, p.get(1)?.as_f64()?)))
                .collect();
            let _ = writeln!(stdout, "selected [{}]", parts.join(","));
        }
    }
    match write_report(&report, cfg, stdout) {
        Ok(paths) => {
            for p in paths {
                let _ = writeln!(stdout, "stage: wrote {}", p.display());
            }
        }
        Err(e) => {
            let _ = writeln!(stdout, "ERROR writing report: {e}");
            return 1;
        }
    }
    for line in report.summary_lines() {
        let _ = writeln!(stdout, "{line}");
    }
    if report.passed() {
        0
    } else {
        1
    }
}
