use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/five_agent.toml")
}

fn distctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distctl")).args(args).output().unwrap()
}

fn run(sub: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = config();
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    distctl(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let path = dir.join("edited.toml");
    fs::write(&path, edit(fs::read_to_string(config()).unwrap())).unwrap();
    path
}

#[test]
fn synth_writes_bundle_history_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("synth", dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let history = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert!(history.starts_with("iteration,cost,delta,"));
    assert_eq!(history.lines().filter(|l| l.ends_with(",true")).count(), 1);
    assert!(dir.path().join("bundle/law.txt").exists());
    assert!(dir.path().join("bundle/gains/L_5_5.txt").exists());
    let manifest = fs::read_to_string(dir.path().join("manifest-synth.json")).unwrap();
    assert!(manifest.contains("\"history.csv\"") && manifest.contains("sha256"));
}

#[test]
fn missing_weight_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |t| t.replace("q_stage", "q_stag"));
    let o = distctl(&["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write_config(dir.path(), |t| {
        let (a, b) = (t.find("q_stage").unwrap(), t.find("r_stage").unwrap());
        format!("{}{}", &t[..a], &t[b..])
    });
    let o = distctl(&["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cost.q"), "{}", stderr(&o));
}

#[test]
fn single_iterate_cap_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |t| t.replace("n_max = 50", "n_max = 1"));
    let o = distctl(&["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("n_max = 1"));
    let history = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 2);
}

#[test]
fn montecarlo_needs_a_bundle_and_positive_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("montecarlo", dir.path(), &["--runs", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing bundle"));
    let o = run("montecarlo", dir.path(), &["--runs", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn montecarlo_rows_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("synth", dir.path(), &[]).status.success());
    let o = run("montecarlo", dir.path(), &["--runs", "100", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(dir.path().join("montecarlo_costs.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 101);
    assert!(run("montecarlo", dir.path(), &["--runs", "100", "--seed", "5"]).status.success());
    assert_eq!(fs::read(dir.path().join("montecarlo_costs.csv")).unwrap(), first);
    assert!(run("montecarlo", dir.path(), &["--runs", "100", "--seed", "6"]).status.success());
    assert_ne!(fs::read(dir.path().join("montecarlo_costs.csv")).unwrap(), first);
}

#[test]
fn tampered_bundle_is_rejected_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("synth", dir.path(), &[]).status.success());
    let law = dir.path().join("bundle/law.txt");
    let text = fs::read_to_string(&law).unwrap();
    fs::write(&law, text.replacen(' ', "  ", 3)).unwrap();
    let o = run("montecarlo", dir.path(), &["--runs", "10"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("hash"));
    let o = distctl(&["report", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bundle_topology_must_match() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("synth", dir.path(), &[]).status.success());
    let o = run("montecarlo", dir.path(), &["--runs", "10", "--topology-override", "ring"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rollout_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("synth", dir.path(), &[]).status.success());
    assert!(run("rollout", dir.path(), &[]).status.success());
    let text = fs::read_to_string(dir.path().join("rollout.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0].split(',').count(), 1 + 5 + 5 + 25);
}

#[test]
fn stability_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("stability", dir.path(), &["--gain", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("stability_summary.csv")).unwrap();
    assert!(summary.trim_end().ends_with("true"));
    let o = run("stability", dir.path(), &["--topology-override", "edges:1-2,2-3,3-4"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("observability"));
}

#[test]
fn stability_from_bundle_gain() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("synth", dir.path(), &[]).status.success());
    let bundle = dir.path().join("bundle");
    let o = run("stability", dir.path(), &["--bundle", bundle.to_str().unwrap(), "--steps", "8"]);
    assert!(matches!(o.status.code(), Some(0) | Some(4)), "{}", stderr(&o));
    let rows = fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 5 * 8);
}

#[test]
fn bad_topology_override_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("synth", dir.path(), &["--topology-override", "star"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_reports_every_requested_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("sweep", dir.path(), &["--links", "3,5,11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let status: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(status, ["failed", "ok", "invalid"]);
}

#[test]
fn compare_single_agent_matches_fully_connected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    fs::write(
        &cfg,
        r#"
[model]
agents = 1
state_dim = 1
input_dim = 1
horizon = 3
a = 1
b = 1
process_noise = 1
measurement_noise = 1

[cost]
q_stage = 1
r_stage = 1

[topology]
kind = "complete"
"#,
    )
    .unwrap();
    let o = distctl(&["compare", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--runs", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let cost = |method: &str| -> String {
        text.lines().find(|l| l.starts_with(method)).unwrap().split(',').nth(1).unwrap().to_string()
    };
    assert_eq!(cost("proposed,"), cost("fully_connected,"));
    let runs = fs::read_to_string(dir.path().join("compare_runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 201);
}

#[test]
fn help_and_usage_codes() {
    assert_eq!(distctl(&["--help"]).status.code(), Some(0));
    assert_eq!(distctl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(distctl(&["synth"]).status.code(), Some(1));
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config();
    let o = Command::new(env!("CARGO_BIN_EXE_distctl"))
        .env("DISTCTL_THREADS", "1")
        .args(["synth", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let one = fs::read(dir.path().join("history.csv")).unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    assert!(run("synth", dir2.path(), &[]).status.success());
    assert_eq!(fs::read(dir2.path().join("history.csv")).unwrap(), one);
}
