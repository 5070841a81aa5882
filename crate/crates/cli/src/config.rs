//! `RunConfig`: flat `key = value` text with dotted keys.
//!
//! Sources in increasing precedence: config file, environment variables
//! `DIRDIFF__<KEY>` (double underscore for each dot, case-insensitive),
//! `--set KEY=VALUE` flags. Every key not given takes a command-specific
//! default, and [`RunConfig::to_text`] writes the fully resolved form.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use dirdiff::fields::{catalog_scalar_fields, catalog_vector_fields, Descriptor, ScalarField, UnitVectorField};
use dirdiff::perturb::{SolverSpec, MAX_SHIFT_CONTRACTION};
use dirdiff::quadrature::{QuadratureRule, QuadratureSpec, MIN_NODES};

pub const ENV_PREFIX: &str = "DIRDIFF__";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

fn invalid(key: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    InvertCheck,
    Distortion,
    NormConvergence,
    WeakType,
    Pointwise,
    Continuity,
    HnDecay,
    CAlpha,
    CoveringDemo,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::InvertCheck,
        Command::Distortion,
        Command::NormConvergence,
        Command::WeakType,
        Command::Pointwise,
        Command::Continuity,
        Command::HnDecay,
        Command::CAlpha,
        Command::CoveringDemo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::InvertCheck => "invert-check",
            Command::Distortion => "distortion",
            Command::NormConvergence => "norm-convergence",
            Command::WeakType => "weak-type",
            Command::Pointwise => "pointwise",
            Command::Continuity => "continuity",
            Command::HnDecay => "h-n-decay",
            Command::CAlpha => "c-alpha",
            Command::CoveringDemo => "covering-demo",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Command::ALL
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                invalid("command", format!("`{s}` is not one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Both => "both",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            _ => Err(invalid("output.format", format!("`{s}` is not json, csv or both"))),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub fields: Vec<Descriptor>,
    pub scalars: Vec<Descriptor>,
    pub t_bound: f64,
    pub s_count: usize,
    pub s_values: Vec<f64>,
    pub s_samples: usize,
    pub q_values: Vec<f64>,
    pub grid_resolution: usize,
    pub grid_radius: f64,
    pub maximal_levels: usize,
    pub maximal_t_max: f64,
    pub quad: QuadratureSpec,
    pub solver: SolverSpec,
    pub seed: u64,
    pub output_path: PathBuf,
    pub output_format: OutputFormat,
    pub lambdas: Vec<f64>,
    pub lambda: f64,
    pub t_values: Vec<f64>,
    pub p: f64,
    pub alphas: Vec<f64>,
    pub alpha: f64,
    pub n_max: usize,
    pub scales: Vec<f64>,
    pub points: usize,
    pub pairs: usize,
    pub lipschitz_pairs: usize,
    pub rectangles: usize,
    pub norm_floor: f64,
    pub ratio_band: Option<(f64, f64)>,
    pub pointwise_factor: f64,
    pub pointwise_tolerance: f64,
    pub pointwise_max_fraction: f64,
    pub intervals: Vec<(f64, f64)>,
    pub c: f64,
}

/// Every accepted key, in output order.
pub const KEYS: &[&str] = &[
    "command",
    "dim",
    "field",
    "scalar",
    "T",
    "s.count",
    "s.values",
    "s.samples",
    "q.values",
    "grid.resolution",
    "grid.radius",
    "maximal.levels",
    "maximal.t_max",
    "quad.rule",
    "quad.nodes",
    "solver.tolerance",
    "solver.max_iterations",
    "seed",
    "output.path",
    "output.format",
    "lambdas",
    "lambda",
    "t.values",
    "p",
    "alphas",
    "alpha",
    "n.max",
    "scales",
    "points",
    "pairs",
    "lipschitz.pairs",
    "rectangles",
    "norm.floor",
    "norm.ratio_band",
    "pointwise.factor",
    "pointwise.tolerance",
    "pointwise.max_fraction",
    "intervals",
    "c",
];

/// Map an environment variable name to a config key.
pub fn env_key(var: &str) -> Option<String> {
    let rest = var.strip_prefix(ENV_PREFIX)?;
    let key = rest.to_ascii_lowercase().replace("__", ".");
    Some(if key == "t" { "T".to_string() } else { key })
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            reason: "expected `key = value`".into(),
        })?;
        let k = normalize_key(k.trim());
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                reason: format!("duplicate key `{k}`"),
            });
        }
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    if k == "t" {
        "T".into()
    } else {
        k.to_string()
    }
}

/// Parse one `KEY=VALUE` override.
pub fn parse_assignment(s: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| invalid(s, "overrides must look like KEY=VALUE"))?;
    Ok((normalize_key(k.trim()), v.trim().to_string()))
}

/// Merge file, environment and flag overrides, then resolve.
pub fn parse_config<I>(file_text: Option<&str>, env: I, sets: &[String]) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut map = match file_text {
        Some(t) => parse_text(t)?,
        None => BTreeMap::new(),
    };
    for (var, value) in env {
        if let Some(k) = env_key(&var) {
            map.insert(k, value);
        }
    }
    for s in sets {
        let (k, v) = parse_assignment(s)?;
        map.insert(k, v);
    }
    RunConfig::from_map(map)
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse::<T>().map_err(|e| invalid(key, format!("`{v}`: {e}"))),
        }
    }

    fn f64s(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => parse_f64_list(&v).map_err(|e| invalid(key, e)),
        }
    }

    fn descriptors(&mut self, key: &str) -> Result<Option<Vec<Descriptor>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .split('|')
                .map(|d| d.trim().parse::<Descriptor>().map_err(|e| invalid(key, e)))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{}` is not a finite number", x.trim()))
        })
        .collect()
}

fn parse_intervals(v: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    let mut rest = v.trim();
    while !rest.is_empty() {
        let open = rest.find('(').ok_or("intervals must look like (a,b),(c,d)")?;
        let close = rest[open..].find(')').ok_or("unclosed interval")? + open;
        let nums = parse_f64_list(&rest[open + 1..close])?;
        if nums.len() != 2 {
            return Err("each interval needs two endpoints".into());
        }
        out.push((nums[0], nums[1]));
        rest = rest[close + 1..].trim_start_matches([',', ' ']);
    }
    Ok(out)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn default_fields(command: Command, dim: usize) -> Result<Vec<Descriptor>, ConfigError> {
    let d = |s: &str| s.parse::<Descriptor>().expect("built-in descriptor");
    Ok(match command {
        Command::InvertCheck | Command::Distortion | Command::WeakType => catalog_vector_fields(dim)
            .map_err(|e| invalid("dim", e))?
            .iter()
            .map(|v| v.descriptor().clone())
            .collect(),
        _ => vec![d("shear:a=1").with("dim", dim as f64)],
    })
}

fn default_scalars(command: Command, dim: usize) -> Result<Vec<Descriptor>, ConfigError> {
    let catalog = catalog_scalar_fields(dim).map_err(|e| invalid("dim", e))?;
    let desc = |i: usize| catalog[i].descriptor().clone();
    Ok(match command {
        Command::HnDecay | Command::CAlpha => catalog.iter().map(|f| f.descriptor().clone()).collect(),
        Command::WeakType => vec![desc(1), desc(0)],
        _ => vec![desc(0)],
    })
}

impl RunConfig {
    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut r = Reader { map };
        let command: Command = r.take("command").ok_or(ConfigError::Missing("command"))?.parse()?;

        let dim_given: Option<usize> = match r.take("dim") {
            None => None,
            Some(v) => Some(v.parse().map_err(|e| invalid("dim", format!("`{v}`: {e}")))?),
        };
        let fields = match r.descriptors("field")? {
            Some(f) => f,
            None => default_fields(command, dim_given.unwrap_or(2))?,
        };
        if fields.is_empty() {
            return Err(invalid("field", "at least one vector field is required"));
        }
        let resolved = fields
            .iter()
            .map(UnitVectorField::from_descriptor)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid("field", e))?;
        let dim = resolved[0].dimension();
        if resolved.iter().any(|v| v.dimension() != dim) || dim_given.is_some_and(|d| d != dim) {
            return Err(invalid("dim", "all fields must share the configured dimension"));
        }
        let scalars = match r.descriptors("scalar")? {
            Some(s) => s,
            None => default_scalars(command, dim)?,
        };
        let scalar_fields = scalars
            .iter()
            .map(ScalarField::from_descriptor)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid("scalar", e))?;
        if scalar_fields.iter().any(|f| f.dimension() != dim) {
            return Err(invalid("scalar", format!("every scalar must live in dimension {dim}")));
        }

        let k_max = resolved.iter().map(|v| v.lipschitz_k()).fold(0.0, f64::max);
        let t_default = if k_max > 0.0 { (0.5_f64).min(0.5 / k_max) } else { 0.5 };
        let t_bound: f64 = r.parse("T", t_default)?;
        if !(t_bound > 0.0 && t_bound.is_finite()) {
            return Err(invalid("T", "must be positive"));
        }
        if t_bound * k_max > MAX_SHIFT_CONTRACTION {
            return Err(invalid(
                "T",
                format!(
                    "contraction invariant T*K <= {MAX_SHIFT_CONTRACTION} violated (T*K = {})",
                    t_bound * k_max
                ),
            ));
        }

        let s_count = r.parse("s.count", if command == Command::Continuity { 65 } else { 17 })?;
        let s_values_default = match command {
            Command::Distortion => vec![-0.25 * t_bound, 0.25 * t_bound, -0.45 * t_bound, 0.45 * t_bound],
            _ => vec![-0.25 * t_bound, 0.0, 0.25 * t_bound],
        };
        let s_values = r.f64s("s.values", s_values_default)?;
        let s_samples = r.parse("s.samples", 8usize)?;
        let q_values = r.f64s("q.values", vec![0.0, 0.25, 0.5, 0.9])?;
        let grid_resolution = r.parse(
            "grid.resolution",
            match command {
                Command::Distortion | Command::HnDecay | Command::CAlpha => 1024usize,
                Command::NormConvergence | Command::WeakType => 512,
                _ => 256,
            },
        )?;
        let grid_radius = r.parse("grid.radius", if command == Command::NormConvergence { 1.5 } else { 2.0 })?;
        let maximal_levels = r.parse("maximal.levels", 8usize)?;
        let maximal_t_max = r.parse("maximal.t_max", 0.5 * t_bound)?;
        let rule = match r.take("quad.rule").as_deref() {
            None | Some("midpoint") => QuadratureRule::MidpointComposite,
            Some("gauss-legendre") => QuadratureRule::GaussLegendre,
            Some(other) => return Err(invalid("quad.rule", format!("`{other}` is not midpoint or gauss-legendre"))),
        };
        let nodes = r.parse("quad.nodes", 64usize)?;
        if nodes < MIN_NODES {
            return Err(invalid("quad.nodes", format!("must be at least {MIN_NODES}")));
        }
        let quad = QuadratureSpec { rule, nodes };
        let tolerance = r.parse("solver.tolerance", 1e-10)?;
        let max_iterations = r.parse("solver.max_iterations", 10_000usize)?;
        let solver = SolverSpec::new(tolerance, max_iterations).map_err(|e| invalid("solver", e))?;
        let seed = r.parse("seed", 0u64)?;
        let output_path = PathBuf::from(r.take("output.path").unwrap_or_else(|| format!("dirdiff-{}", command.name())));
        let output_format = r.parse("output.format", OutputFormat::Both)?;
        let lambdas_default = match command {
            Command::CAlpha => vec![1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0],
            _ => vec![0.1, 0.2, 0.4, 0.6, 0.8],
        };
        let lambdas = r.f64s("lambdas", lambdas_default)?;
        let peak = scalar_fields[0].sup_abs();
        let lambda = r.parse("lambda", if peak.is_finite() && peak > 0.0 { 0.5 * peak } else { 1.0 })?;
        let t_values_default = match command {
            Command::Pointwise => vec![0.1, 0.01, 0.001],
            _ => vec![0.2, 0.1, 0.05, 0.025, 0.0125],
        };
        let t_values = r.f64s("t.values", t_values_default)?;
        let p = r.parse("p", 1.0)?;
        let alphas = r.f64s("alphas", vec![0.25, 0.45])?;
        let alpha = r.parse("alpha", 0.25)?;
        let n_max = r.parse("n.max", 64usize)?;
        let scales = r.f64s("scales", vec![1.0, 0.5])?;
        let points = r.parse("points", if command == Command::Pointwise { 1000usize } else { 10_000 })?;
        let pairs = r.parse("pairs", 10_000usize)?;
        let lipschitz_pairs = r.parse("lipschitz.pairs", 100_000usize)?;
        let rectangles = r.parse("rectangles", 20usize)?;
        let norm_floor = r.parse("norm.floor", 0.1)?;
        let ratio_band = match r.take("norm.ratio_band").as_deref().map(str::trim) {
            None | Some("none") => None,
            Some(v) => match parse_f64_list(v).map_err(|e| invalid("norm.ratio_band", e))?[..] {
                [lo, hi] if lo < hi => Some((lo, hi)),
                _ => return Err(invalid("norm.ratio_band", "expected `none` or `lo,hi` with lo < hi")),
            },
        };
        let pointwise_factor = r.parse("pointwise.factor", 10.0)?;
        let pointwise_tolerance = r.parse("pointwise.tolerance", 0.01)?;
        let pointwise_max_fraction = r.parse("pointwise.max_fraction", 0.05)?;
        let intervals = match r.take("intervals") {
            None => vec![(0.0, 2.0), (1.0, 3.0), (2.0, 4.0)],
            Some(v) => parse_intervals(&v).map_err(|e| invalid("intervals", e))?,
        };
        let c = r.parse("c", 3.9)?;

        if let Some(k) = r.map.keys().next() {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let cfg = RunConfig {
            command,
            dim,
            fields,
            scalars,
            t_bound,
            s_count,
            s_values,
            s_samples,
            q_values,
            grid_resolution,
            grid_radius,
            maximal_levels,
            maximal_t_max,
            quad,
            solver,
            seed,
            output_path,
            output_format,
            lambdas,
            lambda,
            t_values,
            p,
            alphas,
            alpha,
            n_max,
            scales,
            points,
            pairs,
            lipschitz_pairs,
            rectangles,
            norm_floor,
            ratio_band,
            pointwise_factor,
            pointwise_tolerance,
            pointwise_max_fraction,
            intervals,
            c,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.s_count < 3 {
            return Err(invalid("s.count", "SGrid needs at least 3 points"));
        }
        if self.grid_resolution < dirdiff::measure::MIN_RESOLUTION {
            return Err(invalid("grid.resolution", format!("must be at least {}", dirdiff::measure::MIN_RESOLUTION)));
        }
        if !(self.grid_radius > 0.0) {
            return Err(invalid("grid.radius", "must be positive"));
        }
        if self.maximal_levels < 1 {
            return Err(invalid("maximal.levels", "must be at least 1"));
        }
        if !(self.maximal_t_max > 0.0 && self.maximal_t_max <= 0.5 * self.t_bound * (1.0 + 1e-12)) {
            return Err(invalid("maximal.t_max", "must lie in (0, T/2]"));
        }
        if self.s_values.iter().any(|s| s.abs() > 0.5 * self.t_bound * (1.0 + 1e-12)) {
            return Err(invalid("s.values", "every shift must satisfy |s| <= T/2"));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(invalid("lambdas", "levels must be positive"));
        }
        if !(self.lambda > 0.0) {
            return Err(invalid("lambda", "must be positive"));
        }
        if self.alphas.iter().chain([&self.alpha]).any(|a| !(*a > 0.0 && *a < 0.5)) {
            return Err(invalid("alpha", "exponents must lie in (0, 1/2)"));
        }
        if !(self.p >= 1.0) {
            return Err(invalid("p", "must be at least 1"));
        }
        Ok(())
    }

    /// Resolved configuration as `key = value` lines in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let descs = |ds: &[Descriptor]| ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" | ");
        let entries: Vec<(&str, String)> = vec![
            ("command", self.command.name().into()),
            ("dim", self.dim.to_string()),
            ("field", descs(&self.fields)),
            ("scalar", descs(&self.scalars)),
            ("T", self.t_bound.to_string()),
            ("s.count", self.s_count.to_string()),
            ("s.values", join(&self.s_values)),
            ("s.samples", self.s_samples.to_string()),
            ("q.values", join(&self.q_values)),
            ("grid.resolution", self.grid_resolution.to_string()),
            ("grid.radius", self.grid_radius.to_string()),
            ("maximal.levels", self.maximal_levels.to_string()),
            ("maximal.t_max", self.maximal_t_max.to_string()),
            (
                "quad.rule",
                match self.quad.rule {
                    QuadratureRule::MidpointComposite => "midpoint",
                    QuadratureRule::GaussLegendre => "gauss-legendre",
                }
                .into(),
            ),
            ("quad.nodes", self.quad.nodes.to_string()),
            ("solver.tolerance", self.solver.tolerance.to_string()),
            ("solver.max_iterations", self.solver.max_iterations.to_string()),
            ("seed", self.seed.to_string()),
            ("output.path", self.output_path.display().to_string()),
            ("output.format", self.output_format.name().into()),
            ("lambdas", join(&self.lambdas)),
            ("lambda", self.lambda.to_string()),
            ("t.values", join(&self.t_values)),
            ("p", self.p.to_string()),
            ("alphas", join(&self.alphas)),
            ("alpha", self.alpha.to_string()),
            ("n.max", self.n_max.to_string()),
            ("scales", join(&self.scales)),
            ("points", self.points.to_string()),
            ("pairs", self.pairs.to_string()),
            ("lipschitz.pairs", self.lipschitz_pairs.to_string()),
            ("rectangles", self.rectangles.to_string()),
            ("norm.floor", self.norm_floor.to_string()),
            (
                "norm.ratio_band",
                self.ratio_band.map_or("none".into(), |(a, b)| format!("{a},{b}")),
            ),
            ("pointwise.factor", self.pointwise_factor.to_string()),
            ("pointwise.tolerance", self.pointwise_tolerance.to_string()),
            ("pointwise.max_fraction", self.pointwise_max_fraction.to_string()),
            (
                "intervals",
                self.intervals
                    .iter()
                    .map(|(a, b)| format!("({a},{b})"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("c", self.c.to_string()),
        ];
        debug_assert_eq!(entries.len(), KEYS.len());
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn vector_fields(&self) -> dirdiff::Result<Vec<UnitVectorField>> {
        self.fields.iter().map(UnitVectorField::from_descriptor).collect()
    }

    pub fn scalar_fields(&self) -> dirdiff::Result<Vec<ScalarField>> {
        self.scalars.iter().map(ScalarField::from_descriptor).collect()
    }
}
