use std::fs;
use std::process::Command;

use fedsurr::harness::{parse_summary, TRACE_HEADER};

fn fedsurr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedsurr"))
}

const SMALL: [&str; 12] =
    ["--clients", "6", "--lambda", "0.5", "--epochs", "3", "--population", "10", "--generations", "4", "--runs", "2"];

#[test]
fn run_writes_summary_traces_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let status = fedsurr()
        .args(["run", "--problem", "rastrigin", "--dim", "3", "--tau", "1", "--alpha", "0.2", "--acq", "flcb"])
        .args(["--agg", "sorted", "--seed", "5", "--plot", "--out"])
        .arg(dir.path())
        .args(SMALL)
        .status()
        .unwrap();
    assert!(status.success());

    let summary = parse_summary(&fs::read_to_string(dir.path().join("summary.toml")).unwrap()).unwrap();
    assert_eq!(summary.runs.len(), 2);
    assert_eq!(summary.config.master_seed, 5);
    assert_eq!(summary.config.tau, 1);

    let csv = fs::read_to_string(dir.path().join("traces.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    // 5d initial samples reported as round 0, then one row per remaining FE.
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * (6 * 3 + 1));
    assert_eq!(rows[0][..3], ["0", "0", "15"]);
    assert_eq!(rows.last().unwrap()[..3], ["1", "18", "33"]);

    let svg = fs::read_to_string(dir.path().join("convergence.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("master_seed = 5"));
}

#[test]
fn sequential_flag_gives_identical_output() {
    let run = |extra: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        let status = fedsurr()
            .args(["run", "--problem", "ackley", "--dim", "2", "--out"])
            .arg(dir.path())
            .args(SMALL)
            .args(extra)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read_to_string(dir.path().join("traces.csv")).unwrap()
    };
    assert_eq!(run(&[]), run(&["--sequential"]));
}

#[test]
fn sweep_expands_grid_into_directories() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    fs::write(
        &config,
        r#"
[base]
problem = "ellipsoid"
dim = 2
clients = 6
lambda = 0.5
epochs = 2
population = 10
generations = 3
runs = 1

[grid]
alpha = [0.0, 0.5]
acq = ["flcb", "glcb"]
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = fedsurr().arg("sweep").arg(&config).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let mut labels: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    labels.sort();
    assert_eq!(labels, ["acq=flcb_alpha=0.0", "acq=flcb_alpha=0.5", "acq=glcb_alpha=0.0", "acq=glcb_alpha=0.5"]);
    for label in labels {
        assert!(out.join(label).join("summary.toml").exists());
    }
}

#[test]
fn invalid_arguments_fail_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        vec!["run", "--problem", "sphere", "--dim", "2"],
        vec!["run", "--problem", "ackley", "--dim", "2", "--alpha", "1.5"],
        vec!["run", "--problem", "ackley", "--dim", "2", "--lambda", "0"],
        vec!["run", "--problem", "ackley", "--dim", "2", "--acq", "ei"],
    ] {
        let output = fedsurr().args(&bad).arg("--out").arg(dir.path()).output().unwrap();
        assert!(!output.status.success(), "{bad:?}");
        assert!(!output.stderr.is_empty());
    }
}
