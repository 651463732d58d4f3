//! End-to-end checks of the `bbsim` binary: exit codes, file outputs, and
//! reproducibility through the CLI surface.

use std::path::Path;
use std::process::{Command, Output};

fn bbsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{
  "instance": {"generator": {"seed": 5, "arms": 3, "family": "bernoulli"}},
  "policies": [
    {"kind": "bts"},
    {"kind": "epsilon_first", "epsilon": 0.1},
    {"kind": "kube_variant"}
  ],
  "budgets": [50, 100],
  "runs": 5,
  "base_seed": 11,
  "mode": "bernoulli",
  "checkpoint_budgets": [50, 100]
}"#,
    )
    .unwrap();
    path
}

#[test]
fn run_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let out = bbsim(
        &["run", "--config", "config.json", "--out", "rows.csv", "--threads", "2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "policy,budget,run,seed,regret,total_reward,total_cost,stopping_time,pulls_optimal,pulls_arm_1,pulls_arm_2,pulls_arm_3"
    );
    // 3 policies x 2 budgets x 5 runs.
    assert_eq!(lines.count(), 30);
}

#[test]
fn run_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    for (threads, file) in [("1", "a.csv"), ("4", "b.csv")] {
        let out = bbsim(
            &["run", "--config", "config.json", "--out", file, "--threads", threads],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_flag_changes_the_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    for (seed, file) in [("11", "a.csv"), ("12", "b.csv")] {
        let out = bbsim(
            &["run", "--config", "config.json", "--out", file, "--seed", seed],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbsim(
        &["run", "--config", "nope.json", "--out", "rows.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{
  "instance": {"generator": {"seed": 5, "arms": 3, "family": "bernoulli"}},
  "policies": [{"kind": "epsilon_first", "epsilon": 7.0}],
  "budgets": [50],
  "runs": 5,
  "base_seed": 11,
  "mode": "bernoulli"
}"#,
    )
    .unwrap();
    let out = bbsim(
        &["run", "--config", "bad.json", "--out", "rows.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn aggregate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let out = bbsim(
        &["run", "--config", "config.json", "--out", "rows.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = bbsim(
        &["aggregate", "--in", "rows.csv", "--out", "agg.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = std::fs::read_to_string(dir.path().join("agg.csv")).unwrap();
    let mut lines = agg.lines();
    assert_eq!(lines.next().unwrap(), "policy,budget,mean_regret,std_regret,runs");
    // 3 policies x 2 budgets.
    assert_eq!(lines.clone().count(), 6);
    assert!(lines.all(|l| l.ends_with(",5")));
}

#[test]
fn aggregate_rejects_garbage_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.csv"), "hello,world\n1,2\n").unwrap();
    let out = bbsim(
        &["aggregate", "--in", "junk.csv", "--out", "agg.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let out = bbsim(&["bounds", "--config", "config.json"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ln-budget coefficients"), "{text}");
    assert!(text.contains("posterior sampling (bts)"));
    assert!(text.contains("pull_bound"));
}

#[test]
fn bounds_rejects_bad_gamma() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let out = bbsim(
        &["bounds", "--config", "config.json", "--gamma", "1.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_instance_emits_valid_spec_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbsim(
        &["gen-instance", "--seed", "9", "--arms", "4", "--family", "multinomial"],
        dir.path(),
    );
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["arms"].as_array().unwrap().len(), 4);
    // The emitted spec is accepted back as an explicit instance.
    let config = format!(
        r#"{{
  "instance": {},
  "policies": [{{"kind": "bts"}}],
  "budgets": [20],
  "runs": 2,
  "base_seed": 3,
  "mode": "general"
}}"#,
        String::from_utf8(out.stdout).unwrap()
    );
    std::fs::write(dir.path().join("from_spec.json"), config).unwrap();
    let out = bbsim(
        &["run", "--config", "from_spec.json", "--out", "rows.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_instance_rejects_single_arm() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbsim(
        &["gen-instance", "--seed", "9", "--arms", "1", "--family", "bernoulli"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}
