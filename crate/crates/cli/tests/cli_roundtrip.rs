//! Black-box tests of the `growgraph` binary: config/flag merging, artifact
//! layout, byte-identical reruns, and exit codes.

use std::path::Path;
use std::process::Command;

fn growgraph() -> Command {
    Command::new(env!("CARGO_BIN_EXE_growgraph"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn simulate_writes_artifacts_and_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.conf");
    std::fs::write(
        &config,
        "model = ba\nmu = 1.0\nsteps = 2000\nreplicas = 5\nseed = 9\n",
    )
    .unwrap();
    let run = |dir: &Path| {
        let status = growgraph()
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out-dir")
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a);
    run(&b);
    // The serialized config embeds the destination directory, which is the
    // one legitimate difference between the two runs.
    let strip_dest = |text: String| -> String {
        text.lines()
            .filter(|l| !l.contains("out_dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    for name in ["degree.csv", "increments.csv", "trace.csv", "report.json"] {
        let left = strip_dest(read(&a, name));
        assert_eq!(left, strip_dest(read(&b, name)), "{name} differs between reruns");
        assert!(!left.is_empty());
    }
    assert!(read(&a, "degree.csv")
        .starts_with("k,count_mean,fraction_mean,ci_half,d_lower,d_upper,d_plugin"));

    // Flags override the file: a different seed changes the degree table.
    let c = tmp.path().join("c");
    let status = growgraph()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--seed", "10", "--out-dir"])
        .arg(&c)
        .status()
        .unwrap();
    assert!(status.success());
    assert_ne!(read(&a, "degree.csv"), read(&c, "degree.csv"));
}

#[test]
fn solve_then_report_produce_solution_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let status = growgraph()
        .args([
            "solve",
            "--model",
            "mixed",
            "--alpha",
            "0.5",
            "--mu",
            "1.0",
            "--k-max",
            "50",
            "--out-dir",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let solution = read(&dir, "solution.csv");
    assert!(solution.starts_with("k,d_lower,d_upper,d_plugin"));
    assert_eq!(solution.lines().count(), 52);

    // `report` needs a report.json; seed one with a tiny simulate run.
    let status = growgraph()
        .args(["simulate", "--model", "ba", "--steps", "500", "--out-dir"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let status = growgraph().args(["report", "--out-dir"]).arg(&dir).status().unwrap();
    assert!(status.success());
    assert!(read(&dir, "summary.md").contains("# Run summary"));
}

#[test]
fn invalid_inputs_exit_nonzero_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.conf");
    std::fs::write(&config, "model = ba\nsteps = 100\nmodle = ba\n").unwrap();
    let out = growgraph()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");

    let out = growgraph()
        .args(["simulate", "--model", "hardcopy", "--alpha", "0.5"])
        .args(["--steps", "100", "--backend", "histogram"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vertex backend"));
}
