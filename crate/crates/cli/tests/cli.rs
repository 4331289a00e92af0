//! End-to-end tests of the `chiralcav` binary: exit codes, output shapes,
//! config handling, determinism, and the fault-injection path.

use std::io::Write;
use std::process::{Command, Output};

fn chiralcav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiralcav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn config_file(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().expect("temp file");
    f.write_all(json.as_bytes()).expect("write config");
    f
}

/// Parse one float column of a CSV body (header skipped).
fn column(csv: &str, index: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').nth(index).expect("column").parse().expect("float"))
        .collect()
}

#[test]
fn no_subcommand_is_a_usage_error() {
    let out = chiralcav(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_has_28_levels_by_default() {
    let out = chiralcav(&["spectrum"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 29); // header + 28 levels
    assert_eq!(
        lines[0],
        "n_alpha,n_beta,energy_closed,energy_numeric,abs_residual,negative_energy"
    );
    assert!(lines[1].starts_with("0,0,1.0000000000000000e0,"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
    // closed and numeric energies agree tightly on every level
    let residuals = column(&text, 4);
    assert!(residuals.iter().all(|r| *r <= 1e-10));
}

#[test]
fn spectrum_n_max_override_changes_the_level_count() {
    let out = chiralcav(&["spectrum", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out).lines().count(), 11); // header + 10
}

#[test]
fn n_max_flag_is_validated_like_the_config_value() {
    for bad in ["0", "99"] {
        let out = chiralcav(&["spectrum", "--n-max", bad]);
        assert_eq!(out.status.code(), Some(2), "--n-max {bad} should be rejected");
        assert!(stderr_of(&out).contains("error: config: n_total_max"));
    }
    // the override participates in the initial-state check too
    let cfg = config_file(r#"{"initial_n_a": 2, "initial_n_b": 2}"#);
    let out = chiralcav(&["evolve", "--config", cfg.path().to_str().unwrap(), "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("exceeds the truncation"));
}

#[test]
fn evolve_conserves_photons_and_swells_the_norm() {
    let out = chiralcav(&["evolve"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 130); // header + 129 samples
    let conservation = column(&text, 5);
    assert!(conservation.iter().all(|r| *r <= 1e-12));
    // closed and numeric means agree
    let closed_a = column(&text, 1);
    let numeric_a = column(&text, 3);
    for (c, n) in closed_a.iter().zip(&numeric_a) {
        assert!((c - n).abs() <= 1e-9);
    }
    // the non-reciprocal propagator is not an isometry: the raw state norm
    // reaches omega_ab / (2 g_eff) = 0.75 above one at the quarter period
    let norms = column(&text, 6);
    let max_norm = norms.iter().fold(0.0f64, |m, n| m.max(*n));
    assert!(max_norm > 1.49 && max_norm < 1.51, "max norm {max_norm}");
}

#[test]
fn evolve_output_is_byte_identical_across_runs() {
    let first = chiralcav(&["evolve"]);
    let second = chiralcav(&["evolve"]);
    assert_eq!(first.stdout, second.stdout);
    let first = chiralcav(&["asymmetry", "--format", "json"]);
    let second = chiralcav(&["asymmetry", "--format", "json"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn evolve_reads_the_config_file() {
    let cfg = config_file(
        r#"{"omega_ab": 0.06, "omega_ba": 0.06, "t_samples": 17, "initial_n_a": 2, "initial_n_b": 1}"#,
    );
    let out = chiralcav(&["evolve", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 18);
    // reciprocal couplings: the evolution is unitary, so the norm stays 1
    let norms = column(&text, 6);
    assert!(norms.iter().all(|n| (n - 1.0).abs() <= 1e-12));
    // three photons in play
    let sums: Vec<f64> = column(&text, 1)
        .iter()
        .zip(&column(&text, 2))
        .map(|(a, b)| a + b)
        .collect();
    assert!(sums.iter().all(|s| (s - 3.0).abs() <= 1e-12));
}

#[test]
fn bad_configs_exit_2_with_a_category() {
    let cfg = config_file(r#"{"omega0": -1.0}"#);
    let out = chiralcav(&["evolve", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("error: params:"));

    let cfg = config_file(r#"{"omega_zero": 2.0}"#);
    let out = chiralcav(&["evolve", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("error: config:"));

    let out = chiralcav(&["evolve", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("error: io:"));

    let cfg = config_file(r#"{"initial_n_a": 9}"#);
    let out = chiralcav(&["evolve", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("error: config:"));
}

#[test]
fn opposite_sign_couplings_are_outside_the_exchange_regime() {
    let cfg = config_file(r#"{"omega_ba": -0.04}"#);
    let out = chiralcav(&["evolve", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("error: domain:"));
}

#[test]
fn asymmetry_json_carries_the_reference_numbers() {
    let out = chiralcav(&["asymmetry", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid json");
    assert_eq!(v["reference_report"]["amplitude_ratio"], 2.25);
    let samples = v["samples"].as_array().expect("samples array");
    assert_eq!(samples.len(), 33);
    for s in samples {
        let ratio = s["probability_ratio"].as_f64().expect("finite ratio");
        assert!((ratio - 5.0625).abs() <= 1e-10);
        let db = s["db_asymmetry"].as_f64().expect("finite db");
        assert!((db - 7.043_650_362_227_249_5).abs() <= 1e-10);
    }
}

#[test]
fn verify_passes_on_the_defaults() {
    let out = chiralcav(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("intercavity_canonical_commutators"));
    assert!(text.contains("closed_vs_expm_heisenberg"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn verify_activates_the_reciprocal_block_for_equal_couplings() {
    let cfg = config_file(r#"{"omega_ab": 0.06, "omega_ba": 0.06}"#);
    let out = chiralcav(&["verify", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("reciprocal_regression"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    // the block stays inactive away from reciprocity
    let out = chiralcav(&["verify"]);
    assert!(!stdout_of(&out).contains("reciprocal_regression"));
}

#[test]
fn injected_fault_fails_exactly_its_check() {
    let out = chiralcav(&["verify", "--inject-fault", "alpha-plus-miscoupling"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("verification"));
    assert!(err.contains("intercavity_canonical_commutators"));
    let text = stdout_of(&out);
    let failing: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",false"))
        .collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].starts_with("intercavity_canonical_commutators,1.666666666666"));
}

#[test]
fn unknown_fault_names_are_usage_errors() {
    let out = chiralcav(&["verify", "--inject-fault", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("spectrum.csv");
    let out = chiralcav(&["spectrum", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).expect("output file");
    let direct = chiralcav(&["spectrum"]);
    assert_eq!(written, direct.stdout);
}

#[test]
fn verify_json_report_is_structured() {
    let out = chiralcav(&["verify", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("valid json");
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["injected_fault"], serde_json::Value::Null);
    assert!(v["checks"].as_array().unwrap().len() >= 20);
}
