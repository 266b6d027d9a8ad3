//! End-to-end tests of the `pileup` binary: every subcommand is exercised
//! through `std::process::Command`, checking documents on stdout, artifact
//! files behind `--out`, and the exit-status contract (0 only when all solves
//! converged, 2 on invalid input).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pileup"))
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout must be UTF-8")
}

fn stderr_str(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr must be UTF-8")
}

/// Parses a CSV document into (header, numeric rows).
fn parse_csv(doc: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = doc.lines();
    let header = lines.next().expect("document must have a header").to_string();
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().unwrap_or_else(|_| panic!("bad cell {cell:?}")))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn potential_table_has_expected_columns_and_values() {
    let output = bin()
        .args(["potential", "--min", "0.5", "--max", "2.5", "--points", "5"])
        .output()
        .expect("binary must run");
    assert!(output.status.success(), "potential failed: {}", stderr_str(&output));

    let (header, rows) = parse_csv(&stdout_str(&output));
    assert_eq!(header, "s,v,v_prime,v_eff,v_hat", "unexpected header {header}");
    assert_eq!(rows.len(), 5, "expected 5 sample rows, got {}", rows.len());

    for row in &rows {
        let [s, v, vp, ve, vh] = row[..] else { panic!("row must have 5 cells, got {row:?}") };
        let v_lib = pileup::potential::v(s).expect("V must evaluate");
        assert!(
            (v - v_lib).abs() <= 1e-15 * v_lib.abs().max(1.0),
            "table V({s}) = {v} disagrees with the library value {v_lib}"
        );
        assert!(vp < 0.0, "V' must be negative on s > 0, got {vp} at s = {s}");
        assert!(ve >= v, "V_eff ({ve}) must dominate V ({v}) at s = {s}");
        assert!(vh > 0.0, "V_hat must be positive, got {vh} at s = {s}");
    }
    for pair in rows.windows(2) {
        assert!(
            pair[1][1] < pair[0][1],
            "V must decrease along the table: {} then {}",
            pair[0][1],
            pair[1][1]
        );
    }
}

#[test]
fn potential_rejects_nonpositive_min() {
    let output = bin()
        .args(["potential", "--min", "0", "--max", "1"])
        .output()
        .expect("binary must run");
    assert_eq!(output.status.code(), Some(2), "invalid input must exit 2");
    assert!(
        stderr_str(&output).contains("error"),
        "stderr must explain the failure, got {:?}",
        stderr_str(&output)
    );
}

#[test]
fn minimize_emits_parseable_json_and_exits_zero_on_convergence() {
    let output = bin()
        .args(["minimize", "--regime", "3", "--n", "15", "--beta", "0.25"])
        .output()
        .expect("binary must run");
    assert!(output.status.success(), "minimize failed: {}", stderr_str(&output));

    let doc: serde_json::Value =
        serde_json::from_str(&stdout_str(&output)).expect("output must be valid JSON");
    assert_eq!(doc["regime"], 3, "regime must echo the flag");
    assert_eq!(doc["n"], 15, "n must echo the flag");
    assert_eq!(doc["converged"], true, "small solve must converge");

    let positions: Vec<f64> = doc["positions"]
        .as_array()
        .expect("positions must be an array")
        .iter()
        .map(|v| v.as_f64().expect("positions must be numbers"))
        .collect();
    assert_eq!(positions.len(), 15, "one position per wall");
    assert!(
        positions.windows(2).all(|w| w[0] < w[1]),
        "positions must be strictly increasing: {positions:?}"
    );
    assert!(positions[0] > 0.0, "first free wall must sit right of the pinned wall");
}

#[test]
fn minimize_requires_c_for_second_critical_regime() {
    let output = bin()
        .args(["minimize", "--regime", "4", "--n", "10", "--beta", "1.0"])
        .output()
        .expect("binary must run");
    assert_eq!(output.status.code(), Some(2), "missing --c must exit 2");
    assert!(
        stderr_str(&output).contains("--c"),
        "stderr must point at the missing flag, got {:?}",
        stderr_str(&output)
    );
}

#[test]
fn continuum_closed_form_matches_triangular_density() {
    let output = bin()
        .args(["continuum", "--regime", "3", "--m", "101"])
        .output()
        .expect("binary must run");
    assert!(output.status.success(), "continuum failed: {}", stderr_str(&output));

    let (header, rows) = parse_csv(&stdout_str(&output));
    assert_eq!(header, "x,rho", "unexpected header {header}");
    assert_eq!(rows.len(), 101, "expected one row per grid node, got {}", rows.len());
    let rho0 = rows[0][1];
    assert!(
        (rho0 - 4.341607527349606).abs() < 1e-12,
        "triangular density must start at 2/lambda, got {rho0}"
    );
    let last = rows.last().expect("rows nonempty");
    assert!(last[1].abs() < 1e-12, "triangular density must vanish at the tip, got {}", last[1]);
    assert!(
        stderr_str(&output).contains("energy"),
        "stderr must report the minimal energy, got {:?}",
        stderr_str(&output)
    );
}

#[test]
fn run_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec_path = dir.path().join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
            "regime": 3,
            "n_list": [40, 80],
            "beta_rule": {"formula": "1/sqrt(n)"},
            "grid": {"l": 0.7, "m": 201},
            "seed": 11
        }"#,
    )
    .expect("writing spec");

    let run = |out: &Path| {
        std::fs::create_dir_all(out.parent().expect("out has a parent")).expect("mkdir");
        let output = bin()
            .arg("run")
            .arg(&spec_path)
            .arg("--out")
            .arg(out)
            .args(["--format", "json", "--jobs", "2"])
            .output()
            .expect("binary must run");
        assert!(output.status.success(), "run failed: {}", stderr_str(&output));
        std::fs::read(out.with_extension("json")).expect("JSON artifact must exist")
    };

    let first = run(&dir.path().join("a/sweep"));
    let second = run(&dir.path().join("b/sweep"));
    assert_eq!(first, second, "same spec and seed must reproduce byte-identical JSON");

    let density = dir.path().join("a/sweep_density.csv");
    let (header, rows) = parse_csv(&std::fs::read_to_string(density).expect("density file"));
    assert_eq!(header, "x,rho", "density artifact header");
    assert_eq!(rows.len(), 201, "density artifact must sample every grid node");
}

#[test]
fn run_prints_summary_csv_to_stdout_without_out_flag() {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec_path = dir.path().join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
            "regime": 3,
            "n_list": [40],
            "beta_rule": {"formula": "1/sqrt(n)"},
            "grid": {"l": 0.7, "m": 101},
            "seed": 4
        }"#,
    )
    .expect("writing spec");

    let output = bin().arg("run").arg(&spec_path).output().expect("binary must run");
    assert!(output.status.success(), "run failed: {}", stderr_str(&output));
    let doc = stdout_str(&output);
    let mut lines = doc.lines();
    assert_eq!(
        lines.next(),
        Some("n,beta,energy_discrete,energy_continuum,w1,el_residual,iters,converged"),
        "summary CSV header is pinned"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1, "one record per requested n, got {rows:?}");
    assert!(rows[0].starts_with("40,"), "record must carry its n: {}", rows[0]);
    assert!(rows[0].ends_with(",true"), "the n = 40 solve must converge: {}", rows[0]);
}

#[test]
fn run_rejects_missing_spec_file_with_exit_two() {
    let output = bin()
        .args(["run", "/nonexistent/definitely_missing.json"])
        .output()
        .expect("binary must run");
    assert_eq!(output.status.code(), Some(2), "I/O failure must exit 2");
}
