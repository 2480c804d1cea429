//! End-to-end tests of the `spoofbench` binary: exit codes, file outputs,
//! and the enumerate -> train -> eval -> spoof -> analyze chain on a toy
//! landscape.

use std::path::Path;
use std::process::{Command, Output};

fn spoofbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spoofbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(output: &Output, context: &str) {
    assert!(
        output.status.success(),
        "{context} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn info_prints_version_tags() {
    let output = spoofbench(&["info"]);
    assert_success(&output, "info");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("minirep-v1"));
    assert!(stdout.contains("mlp-ckpt-v1"));
    assert!(stdout.contains("spooflog-v1"));

    let output = spoofbench(&["info", "--json"]);
    assert_success(&output, "info --json");
    let parsed: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("machine-readable output");
    assert_eq!(parsed["vm_semantics"], "minirep-v1");
}

#[test]
fn usage_errors_exit_1() {
    // missing required --out
    let output = spoofbench(&["enumerate", "--k", "4", "--len", "5"]);
    assert_eq!(exit_code(&output), 1);
    // unknown subcommand
    let output = spoofbench(&["frobnicate"]);
    assert_eq!(exit_code(&output), 1);
}

#[test]
fn data_errors_exit_2() {
    // enumeration guard: 8^11 exceeds the limit
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("list.txt");
    let output = spoofbench(&[
        "enumerate",
        "--k",
        "8",
        "--len",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("guard"), "stderr: {stderr}");

    // missing landscape file
    let output = spoofbench(&[
        "train",
        "--landscape",
        "/nonexistent.txt",
        "--seed",
        "1",
        "--out-model",
        dir.path().join("m.ckpt").to_str().unwrap(),
        "--out-metrics",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn enumerate_writes_list_and_consistent_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy.txt");
    let output = spoofbench(&[
        "enumerate",
        "--k",
        "4",
        "--len",
        "5",
        "--budget",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_success(&output, "enumerate");
    let list = std::fs::read_to_string(&out).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("toy.meta.json")).unwrap())
            .unwrap();
    assert_eq!(list.lines().count() as u64, meta["count"].as_u64().unwrap());
    assert_eq!(meta["space"].as_u64().unwrap(), 1024);
    assert_eq!(meta["semantics_version"], "minirep-v1");
    assert!(meta["count"].as_u64().unwrap() > 0);
}

fn run_chain(dir: &Path) -> (String, String, String) {
    // toy landscape via the VM
    let list = dir.join("landscape.txt");
    assert_success(
        &spoofbench(&[
            "enumerate",
            "--k",
            "6",
            "--len",
            "6",
            "--budget",
            "100",
            "--out",
            list.to_str().unwrap(),
        ]),
        "enumerate",
    );

    let model = dir.join("model.ckpt");
    let metrics = dir.join("metrics.json");
    let splits = dir.join("splits");
    assert_success(
        &spoofbench(&[
            "train",
            "--landscape",
            list.to_str().unwrap(),
            "--alphabet-size",
            "6",
            "--length",
            "6",
            "--seed",
            "42",
            "--embed-dim",
            "8",
            "--hidden1",
            "32",
            "--hidden2",
            "16",
            "--epochs",
            "4",
            "--batch-size",
            "256",
            "--out-model",
            model.to_str().unwrap(),
            "--out-metrics",
            metrics.to_str().unwrap(),
            "--out-splits",
            splits.to_str().unwrap(),
        ]),
        "train",
    );
    assert!(model.exists() && metrics.exists() && splits.join("splits.json").exists());
    assert!(dir.join("curves.csv").exists(), "train must emit the per-epoch curves CSV");

    let eval_out = dir.join("eval.json");
    assert_success(
        &spoofbench(&[
            "eval",
            "--model",
            model.to_str().unwrap(),
            "--splits",
            splits.to_str().unwrap(),
            "--split",
            "test",
            "--out",
            eval_out.to_str().unwrap(),
        ]),
        "eval",
    );
    let eval: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&eval_out).unwrap()).unwrap();
    assert!(eval["accuracy"].as_f64().unwrap() > 0.0);

    let runs = dir.join("runs");
    assert_success(
        &spoofbench(&[
            "spoof",
            "--model",
            model.to_str().unwrap(),
            "--landscape",
            list.to_str().unwrap(),
            "--budget",
            "50",
            "--replicates",
            "2",
            "--seed",
            "7",
            "--out",
            runs.to_str().unwrap(),
        ]),
        "spoof",
    );

    let report = dir.join("report");
    assert_success(
        &spoofbench(&[
            "analyze",
            "--runs",
            runs.to_str().unwrap(),
            "--landscape",
            list.to_str().unwrap(),
            "--alphabet-size",
            "6",
            "--length",
            "6",
            "--metrics",
            metrics.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ]),
        "analyze",
    );

    (
        std::fs::read_to_string(runs.join("trajectories.jsonl")).unwrap(),
        std::fs::read_to_string(report.join("table2.csv")).unwrap(),
        std::fs::read_to_string(report.join("summary.json")).unwrap(),
    )
}

#[test]
fn full_command_chain_produces_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (log, table2, summary) = run_chain(dir.path());
    // 2 replicates x (6 uniform + 6 random) x 50 queries
    assert_eq!(log.lines().count(), 2 * 12 * 50);
    assert!(table2.starts_with("query,random_start_mean,uniform_start_mean\n"));
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary["campaign"]["total_runs"], 24);
    assert_eq!(summary["landscape"]["synthetic"], false);
}

#[test]
fn reproduce_micro_is_deterministic_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        assert_success(
            &spoofbench(&[
                "reproduce",
                "--preset",
                "micro",
                "--out",
                out.to_str().unwrap(),
            ]),
            "reproduce",
        );
    }
    let manifest1 = std::fs::read(out1.join("manifest.json")).unwrap();
    let manifest2 = std::fs::read(out2.join("manifest.json")).unwrap();
    assert_eq!(manifest1, manifest2);
    assert_eq!(
        std::fs::read(out1.join("trajectories.jsonl")).unwrap(),
        std::fs::read(out2.join("trajectories.jsonl")).unwrap()
    );
    assert!(out1.join("report/confidence.svg").exists());

    // a --jobs cap must not change a single byte
    let out3 = dir.path().join("c");
    assert_success(
        &spoofbench(&[
            "reproduce",
            "--preset",
            "micro",
            "--jobs",
            "1",
            "--out",
            out3.to_str().unwrap(),
        ]),
        "reproduce --jobs 1",
    );
    assert_eq!(
        manifest1,
        std::fs::read(out3.join("manifest.json")).unwrap()
    );
}

#[test]
fn reproduce_accepts_a_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("experiment.toml");
    std::fs::write(
        &config_path,
        r#"
seed = 5

[landscape]
source = "synthetic"
alphabet_size = 6
length = 7
target_count = 150
families = 3
core_symbols = 3

[model]
embed_dim = 8
hidden1 = 32
hidden2 = 16
dropout = 0.1

[train]
epochs = 3
batch_size = 64
learning_rate = 0.002
weight_decay = 0.0001

[spoof]
query_budget = 40
replicates = 1
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_success(
        &spoofbench(&[
            "reproduce",
            "--config",
            config_path.to_str().unwrap(),
            "--seed",
            "99",
            "--out",
            out.to_str().unwrap(),
        ]),
        "reproduce --config",
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 99, "--seed must override the config");
    assert_eq!(manifest["config"]["spoof"]["replicates"], 1);
    assert_eq!(manifest["seeds"]["campaign_master"], 99);
}
