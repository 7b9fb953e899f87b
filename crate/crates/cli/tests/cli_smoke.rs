//! End-to-end checks of the binary: artifact layout, determinism, resume
//! semantics, and exit codes, all on deliberately tiny sweeps.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lattice-homog");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawning the binary")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

/// records.csv with the wall-clock duration column blanked out, so two runs
/// of the same config can be compared bit for bit.
fn records_modulo_duration(dir: &Path) -> String {
    let text = fs::read_to_string(dir.join("records.csv")).unwrap();
    let mut lines: Vec<String> = Vec::new();
    for line in text.lines() {
        let cut = line.rfind(',').unwrap();
        lines.push(line[..cut].to_string());
    }
    lines.join("\n")
}

fn tiny_config(out_dir: &Path) -> String {
    format!(
        "experiment = \"fig1_fixed_realization\"\n\
         epsilons = [0.1, 0.08]\n\
         output_dir = \"{}\"\n",
        out_dir.display()
    )
}

#[test]
fn run_writes_complete_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));
    let result = run(&["run", "--config", &cfg]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));

    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 3, "header plus one record per epsilon");
    assert!(records.starts_with("experiment,epsilon,trial,seed,"));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "complete");
    assert_eq!(summary["records"], 2);
    assert_eq!(summary["per_epsilon"].as_array().unwrap().len(), 2);
    assert_eq!(summary["config"]["T0"], 1.0, "horizon filled in by normalization");
    let hash = summary["config_hash"].as_str().unwrap().to_string();

    for name in ["rho_vs_epsilon.svg", "rho_normalized_vs_epsilon.svg", "residual_vs_epsilon.svg"]
    {
        let svg = fs::read_to_string(out.join(name)).unwrap();
        assert!(svg.contains(&hash), "{name} must embed the config hash");
    }
    assert!(!out.join("failures.csv").exists());
}

#[test]
fn repeat_runs_are_identical_apart_from_durations() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg_a = write_config(&tmp.path().join("."), &tiny_config(&a));
    assert!(run(&["run", "--config", &cfg_a]).status.success());
    let cfg_b = tmp.path().join("config_b.toml");
    fs::write(&cfg_b, tiny_config(&b)).unwrap();
    assert!(run(&["run", "--config", &cfg_b.display().to_string()]).status.success());

    assert_eq!(records_modulo_duration(&a), records_modulo_duration(&b));

    // the full-config hash covers the output path, so it differs by design;
    // the run identity must not
    let strip = |dir: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
        v["config"]["output_dir"] = serde_json::Value::Null;
        v["config_hash"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b), "summaries agree once the output path is ignored");
}

#[test]
fn interrupted_runs_resume_instead_of_recomputing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));

    // first pass covers only the larger epsilon
    let first = run(&["run", "--config", &cfg, "--epsilons", "0.1"]);
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));

    // second pass extends the grid; the stored cell must not be recomputed
    let second = run(&["run", "--config", &cfg]);
    assert!(second.status.success(), "stderr: {}", stderr_of(&second));
    let log = stderr_of(&second);
    assert!(log.contains("eps=0.08"), "new cell is computed: {log}");
    assert!(!log.contains("eps=0.1 "), "stored cell is reused: {log}");

    // and the resumed file matches a from-scratch run of the full grid
    let full = tmp.path().join("full");
    let cfg_full = tmp.path().join("config_full.toml");
    fs::write(&cfg_full, tiny_config(&full)).unwrap();
    assert!(run(&["run", "--config", &cfg_full.display().to_string()]).status.success());
    assert_eq!(records_modulo_duration(&out), records_modulo_duration(&full));
}

#[test]
fn foreign_results_are_rejected_unless_fresh() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));
    assert!(run(&["run", "--config", &cfg]).status.success());

    // same directory, different seed: the stored cells would be wrong
    let clash = run(&["run", "--config", &cfg, "--seed", "8"]);
    assert!(!clash.status.success());
    let msg = stderr_of(&clash);
    assert!(msg.contains("--fresh"), "error should point at --fresh: {msg}");

    // --fresh discards and recomputes
    let fresh = run(&["run", "--config", &cfg, "--seed", "8", "--fresh"]);
    assert!(fresh.status.success(), "stderr: {}", stderr_of(&fresh));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 8);
}

#[test]
fn plot_regenerates_svgs_from_stored_records() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));
    assert!(run(&["run", "--config", &cfg]).status.success());
    let hash: String = serde_json::from_str::<serde_json::Value>(
        &fs::read_to_string(out.join("summary.json")).unwrap(),
    )
    .unwrap()["config_hash"]
        .as_str()
        .unwrap()
        .into();

    let replot = tmp.path().join("replot");
    let result = run(&[
        "plot",
        "--input",
        &out.display().to_string(),
        "--output-dir",
        &replot.display().to_string(),
    ]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));
    let svg = fs::read_to_string(replot.join("rho_vs_epsilon.svg")).unwrap();
    assert!(svg.contains(&hash), "replotted SVG keeps the original config hash");
}

#[test]
fn failing_trials_are_recorded_and_set_the_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = format!(
        "experiment = \"fig1_fixed_realization\"\n\
         epsilons = [0.1]\n\
         output_dir = \"{}\"\n\n\
         [integrator]\n\
         method = \"yoshida6\"\n\
         dt = 1e9\n\
         observe_every = 0\n",
        out.display()
    );
    let cfg = write_config(tmp.path(), &body);
    let result = run(&["run", "--config", &cfg]);
    assert_eq!(result.status.code(), Some(1));
    let failures = fs::read_to_string(out.join("failures.csv")).unwrap();
    assert!(failures.contains("dt"), "failure reason is recorded: {failures}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "completed_with_failures");
}

#[test]
fn bad_arguments_fail_fast() {
    let no_target = run(&["run"]);
    assert!(!no_target.status.success());
    assert!(stderr_of(&no_target).contains("--config"));

    let unknown = run(&["run", "--experiment", "fig9_unheard_of"]);
    assert!(!unknown.status.success());
    assert!(stderr_of(&unknown).contains("unknown experiment"));

    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));
    let bad_eps = run(&["run", "--config", &cfg, "--epsilons", "0.9"]);
    assert!(!bad_eps.status.success());
    assert!(stderr_of(&bad_eps).contains("0.9"));
}

#[test]
fn verify_subcommand_reports_every_check() {
    let result = run(&["verify"]);
    assert!(result.status.success(), "stderr: {}", stderr_of(&result));
    let text = String::from_utf8_lossy(&result.stdout);
    let passes = text.lines().filter(|l| l.starts_with("PASS ")).count();
    assert!(passes >= 25, "expected a full suite of checks, saw {passes}:\n{text}");
    assert!(!text.contains("\nFAIL "), "{text}");
    assert!(text.trim_end().ends_with("0 failed"), "{text}");
}
