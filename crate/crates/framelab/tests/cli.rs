//! End-to-end checks of the `framelab` binary: exit codes, JSON report
//! shapes, and byte-level reproducibility of seeded output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_framelab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn framelab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

/// Writes `text` to a unique temp file and returns its path.
fn fixture(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("framelab-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).expect("write fixture");
    path
}

const TWO_ATOMS: &str = r#"{"kind":"atomic","atoms":[[[0.0],0.5],[[0.5],0.5]]}"#;
const LATTICE: &str = r#"{"kind":"lattice","dim":1,"step":1.0}"#;

#[test]
fn catalog_list_names_every_entry() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for id in [
        "two_atom",
        "two_interval",
        "unit_cube_lattice",
        "cantor4",
        "dirac_tight",
        "lebesgue_plancherel",
        "no_frame_counterexample",
        "p_gt_2_divergence",
    ] {
        assert!(text.contains(id), "missing {id} in:\n{text}");
    }
}

#[test]
fn catalog_verify_passes_and_reports_json() {
    let out = run(&["catalog", "verify", "two_atom"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json report");
    assert_eq!(report["id"], "two_atom");
    assert_eq!(report["pass"], true);
    assert!(report["measured"].is_number());
    assert!(report["runtime_ms"].is_number());
}

#[test]
fn catalog_verify_unknown_id_exits_2() {
    let out = run(&["catalog", "verify", "no_such_entry"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_report_is_ordered_and_deterministic() {
    let mu = fixture("mu.json", TWO_ATOMS);
    let nu = fixture("nu.json", LATTICE);
    let args = [
        "bounds",
        "--mu",
        mu.to_str().unwrap(),
        "--nu",
        nu.to_str().unwrap(),
        "--p",
        "2",
        "--budget",
        "20",
        "--seed",
        "7",
        "--trunc",
        "8",
    ];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&first.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("json report");
    let lo = report["estimate"]["lower_hat"].as_f64().unwrap();
    let hi = report["estimate"]["upper_hat"].as_f64().unwrap();
    assert!(lo > 0.0 && lo <= hi, "lo={lo} hi={hi}");
    assert_eq!(report["ordering_ok"], true);
    assert!(report["certificates"].as_array().map_or(false, |c| !c.is_empty()));

    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "same seed must give identical bytes");
}

#[test]
fn bounds_csv_has_fixed_header_and_is_reproducible() {
    let mu = fixture("mu-csv.json", TWO_ATOMS);
    let nu = fixture("nu-csv.json", LATTICE);
    let args = [
        "bounds",
        "--mu",
        mu.to_str().unwrap(),
        "--nu",
        nu.to_str().unwrap(),
        "--p",
        "2",
        "--budget",
        "10",
        "--trunc",
        "8",
        "--format",
        "csv",
    ];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("family_id,sample_index,p,q,truncation,functional,norm_q_power,ratio")
    );
    assert!(lines.count() >= 10, "one row per sample per family");
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn bounds_rejects_malformed_input_with_exit_2() {
    let bad = fixture("bad.json", r#"{"kind":"nosuch"}"#);
    let nu = fixture("nu-bad.json", LATTICE);
    let out = run(&[
        "bounds",
        "--mu",
        bad.to_str().unwrap(),
        "--nu",
        nu.to_str().unwrap(),
        "--p",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn construct_convolve_multiplies_masses() {
    let a = fixture("conv-a.json", TWO_ATOMS);
    let b = fixture("conv-b.json", r#"{"kind":"atomic","atoms":[[[1.0],2.0]]}"#);
    let out = run(&["construct", "convolve", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let spec: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("measure json");
    assert_eq!(spec["kind"], "atomic");
    let total: f64 = spec["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a[1].as_f64().unwrap())
        .sum();
    assert!((total - 2.0).abs() < 1e-12);
}

#[test]
fn construct_discretize_emits_atomic_measure() {
    let nu = fixture(
        "disc.json",
        r#"{"kind":"density","box":[[0.0,2.0]],"pieces":[{"box":[[0.0,2.0]],"value":1.0}]}"#,
    );
    let out = run(&[
        "construct",
        "discretize",
        "--nu",
        nu.to_str().unwrap(),
        "--r",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let spec: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("measure json");
    assert_eq!(spec["kind"], "atomic");
    assert_eq!(spec["atoms"].as_array().unwrap().len(), 2);
}

#[test]
fn construct_interpolate_reports_intermediate_exponent() {
    let out = run(&[
        "construct",
        "interpolate",
        "--p0",
        "2",
        "--p1",
        "4",
        "--c0",
        "1.0",
        "--c1",
        "2.0",
        "--theta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json report");
    let p = report["p"].as_f64().unwrap();
    // 1/p = (1-theta)/2 + theta/4
    assert!((p - 8.0 / 3.0).abs() < 1e-12, "p={p}");
    assert!(report["certificate"]["upper"].is_number());
}

#[test]
fn construct_perturb_round_trips_as_spectrum() {
    let out = run(&["construct", "perturb", "--lambda", "lattice", "--C", "0.1", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let spec: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("spectrum json");
    assert_eq!(spec["kind"], "perturbed");
    assert_eq!(spec["c"].as_f64(), Some(0.1));
}

#[test]
fn construct_smooth_emits_density() {
    let nu = fixture("smooth.json", TWO_ATOMS);
    let out = run(&["construct", "smooth", "--nu", nu.to_str().unwrap(), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let spec: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("measure json");
    assert_eq!(spec["kind"], "density");
}
