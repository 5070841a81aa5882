use std::path::Path;
use std::process::{Command, Output};

use dirdiff_cli::parse_config;
use proptest::prelude::*;

fn dirdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirdiff"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn covering_demo_prints_selection() {
    let o = dirdiff(&["covering-demo", "--set", "intervals=(0,2),(1,3),(2,4)", "--set", "c=3.9", "--out", "-", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selected [(0,2),(2,4)]"), "{}", stdout(&o));
}

#[test]
fn constant_field_inverts_to_rounding() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("inv");
    let o = dirdiff(&[
        "invert-check",
        "--set", "field=constant:angle=0",
        "--set", "points=2000",
        "--set", "pairs=2000",
        "--set", "lipschitz.pairs=2000",
        "--out", base.to_str().unwrap(),
        "--format", "both",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for e in csv_column(&base.with_extension("csv"), "max_roundtrip") {
        assert!(e.parse::<f64>().unwrap() <= 1e-15, "{e}");
    }
    assert!(base.with_extension("json").exists());
}

#[test]
fn contraction_violation_is_rejected() {
    let o = dirdiff(&["weak-type", "--set", "field=shear:a=2.4", "--set", "T=0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("T*K <= 0.95"), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let o = dirdiff(&["pointwise", "--set", "grid.resolutoin=64"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let base = dir.path().join(name);
        let o = dirdiff(&[
            "distortion",
            "--set", "rectangles=3",
            "--set", "grid.resolution=64",
            "--seed", "11",
            "--out", base.to_str().unwrap(),
            "--format", "csv",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        std::fs::read(base.with_extension("csv")).unwrap()
    };
    let a = run("a");
    assert!(!a.is_empty());
    assert_eq!(a, run("b"));
}

#[test]
fn weak_type_writes_one_row_per_level_and_shift() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("wt");
    let o = dirdiff(&[
        "weak-type",
        "--set", "field=shear:a=1",
        "--set", "scalar=indicator:lo=0;0,hi=1;1",
        "--set", "lambdas=0.2,0.6",
        "--set", "s.count=5",
        "--set", "grid.resolution=64",
        "--out", base.to_str().unwrap(),
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(csv_column(&base.with_extension("csv"), "lambda").len(), 10);
    assert!(stdout(&o).contains("2/2 verdicts pass"));
}

#[test]
fn exit_code_reports_failed_verdicts() {
    // A smooth profile converges at second order, outside this band.
    let o = dirdiff(&[
        "norm-convergence",
        "--set", "grid.resolution=128",
        "--set", "norm.ratio_band=1.5,2.5",
        "--out", "-",
        "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL halving ratio"));
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn resolved_configs_round_trip(
        cmd in prop::sample::select(vec![
            "invert-check", "distortion", "norm-convergence", "weak-type", "pointwise",
            "continuity", "h-n-decay", "c-alpha", "covering-demo",
        ]),
        a in 0.1..1.5f64,
        t in 0.05..0.6f64,
        seed in any::<u64>(),
        count in 3usize..40,
        res in 16usize..2048,
        lambdas in prop::collection::vec(0.01..5.0f64, 1..6),
        tol in 1e-13..1e-6f64,
    ) {
        prop_assume!(t * a <= 0.95);
        let text = format!(
            "command = {cmd}\nfield = shear:a={a}\nT = {t}\nseed = {seed}\ns.count = {count}\n\
             grid.resolution = {res}\nlambdas = {}\nsolver.tolerance = {tol}\n",
            list(&lambdas)
        );
        let first = parse_config(Some(&text), Vec::new(), &[]).unwrap();
        let written = first.to_text();
        let second = parse_config(Some(&written), Vec::new(), &[]).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(written, second.to_text());
    }
}
