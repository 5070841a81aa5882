use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dirdiff_cli::{parse_config, run};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

/// Numerical checks for differentiation along Lipschitz unit vector fields.
///
/// Configuration keys are flat and dotted (`maximal.levels = 8`). Precedence:
/// config file < `DIRDIFF__<KEY>` environment variables (`__` for each dot)
/// < `--set` < the dedicated flags below.
#[derive(Debug, Parser)]
#[command(name = "dirdiff", version)]
struct Cli {
    /// invert-check, distortion, norm-convergence, weak-type, pointwise,
    /// continuity, h-n-decay, c-alpha or covering-demo
    command: Option<String>,
    /// Config file with `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path without extension (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let mut sets = cli.set.clone();
    if let Some(c) = &cli.command {
        sets.push(format!("command={c}"));
    }
    if let Some(o) = &cli.out {
        sets.push(format!("output.path={}", o.display()));
    }
    if let Some(f) = cli.format {
        let name = match f {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Both => "both",
        };
        sets.push(format!("output.format={name}"));
    }
    if let Some(s) = cli.seed {
        sets.push(format!("seed={s}"));
    }
    let cfg = match parse_config(file_text.as_deref(), std::env::vars(), &sets) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let code = run(&cfg, &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
