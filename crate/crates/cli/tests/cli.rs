//! End-to-end tests of the `qngrc` binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qngrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qngrc"))
        .args(args)
        .env_remove("QNGRC_OUT_DIR")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qngrc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> (i32, String) {
    let out = qngrc(args);
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn dir_arg(d: &TempDir) -> &str {
    d.path().to_str().unwrap()
}

#[test]
fn generate_lorenz_rows() {
    let d = TempDir::new().unwrap();
    ok(&[
        "generate",
        "--task",
        "lorenz63",
        "--steps",
        "1700",
        "--out-dir",
        dir_arg(&d),
    ]);
    let csv = read(d.path().join("lorenz63.series.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,x1,x2,x3");
    assert_eq!(lines.len(), 1701);
    assert!(read(d.path().join("lorenz63.series.manifest")).contains("# generate.steps = 1700"));
}

#[test]
fn generate_timer_rows() {
    let d = TempDir::new().unwrap();
    let path = d.path().join("timer.csv");
    ok(&[
        "generate",
        "--task",
        "timer",
        "--tau",
        "6",
        "-o",
        path.to_str().unwrap(),
    ]);
    let csv = read(&path);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,x1,y1");
    assert_eq!(lines.len(), 11);
    let hot: Vec<&str> = lines[1..]
        .iter()
        .filter(|l| l.ends_with(",1"))
        .copied()
        .collect();
    assert_eq!(hot, ["9,1,1"]);
    assert_eq!(lines[4], "3,1,0");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["run", "--task", "bogus"]).0, 2);
    assert_eq!(code(&["run"]).0, 2);
    assert_eq!(code(&["frobnicate"]).0, 2);
    assert_eq!(
        code(&["run", "--task", "lorenz63", "--set", "feature.nope=1"]).0,
        2
    );
    let d = TempDir::new().unwrap();
    assert_eq!(
        code(&["sweep", "--task", "lorenz63", "--out-dir", dir_arg(&d)]).0,
        2
    );
    assert_eq!(
        code(&[
            "sweep",
            "--task",
            "lorenz63",
            "--grid",
            "feature.s=",
            "--out-dir",
            dir_arg(&d)
        ])
        .0,
        2
    );
}

#[test]
fn missing_output_dir_exits_3_with_path() {
    let d = TempDir::new().unwrap();
    let missing = d.path().join("nowhere");
    let (c, err) = code(&[
        "generate",
        "--task",
        "lorenz63",
        "--out-dir",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(c, 3);
    assert!(err.contains(missing.to_str().unwrap()), "{err}");
    let (c, err) = code(&[
        "run",
        "--task",
        "timer",
        "--out-dir",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(c, 3);
    assert!(err.contains("nowhere"), "{err}");
    let (c, _) = code(&[
        "run",
        "--config",
        missing.join("x.manifest").to_str().unwrap(),
    ]);
    assert_eq!(c, 3);
}

#[test]
fn singular_gram_exits_4() {
    let d = TempDir::new().unwrap();
    let args = [
        "run",
        "--task",
        "timer",
        "--set",
        "readout.solver=cholesky",
        "--set",
        "feature.s=2",
        "--out-dir",
        dir_arg(&d),
    ];
    let (c, err) = code(&args);
    assert_eq!(c, 4, "{err}");
    assert!(err.contains("readout."), "{err}");
}

#[test]
fn timer_run_is_exact() {
    let d = TempDir::new().unwrap();
    let stdout = ok(&[
        "run",
        "--task",
        "timer",
        "--tau",
        "6",
        "--out-dir",
        dir_arg(&d),
    ]);
    assert!(stdout.contains("accuracy 1"));
    let json: serde_json::Value =
        serde_json::from_str(&read(d.path().join("timer.metrics.json"))).unwrap();
    assert_eq!(json["accuracy"], 1.0);
    assert_eq!(json["task"], "timer");
    let traj = read(d.path().join("timer.trajectory.csv"));
    assert!(
        traj.starts_with("step,pred_1,thresholded_1,target_1\n"),
        "{traj}"
    );
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        ok(&[
            "run",
            "--task",
            "lorenz63",
            "--set",
            "measurement.mode=shots",
            "--seed",
            "5",
            "--out-dir",
            dir_arg(d),
        ]);
    }
    ok(&[
        "run",
        "--task",
        "lorenz63",
        "--set",
        "measurement.mode=shots",
        "--seed",
        "5",
        "--sequential",
        "--out-dir",
        dir_arg(&b),
        "--set",
        "output.prefix=seq",
    ]);
    for f in ["metrics.json", "trajectory.csv"] {
        let first = read(a.path().join(format!("lorenz63.{f}")));
        assert_eq!(first, read(b.path().join(format!("lorenz63.{f}"))));
        assert_eq!(first, read(b.path().join(format!("seq.{f}"))));
    }
}

#[test]
fn manifest_echo_replays_the_run() {
    let d = TempDir::new().unwrap();
    ok(&[
        "run",
        "--task",
        "narma5",
        "--set",
        "measurement.mode=shots",
        "--seed",
        "3",
        "--out-dir",
        dir_arg(&d),
    ]);
    let echo = d.path().join("narma5.manifest");
    let replay = TempDir::new().unwrap();
    ok(&[
        "run",
        "--config",
        echo.to_str().unwrap(),
        "--out-dir",
        dir_arg(&replay),
    ]);
    let a = read(d.path().join("narma5.metrics.json"));
    assert_eq!(a, read(replay.path().join("narma5.metrics.json")));
}

#[test]
fn flags_override_config() {
    let d = TempDir::new().unwrap();
    let cfg = d.path().join("base.manifest");
    std::fs::write(&cfg, "task.name = timer\ntask.tau = 5\nrun.seed = 1\n").unwrap();
    ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "10",
        "--out-dir",
        dir_arg(&d),
    ]);
    let echo = read(d.path().join("timer.manifest"));
    assert!(
        echo.contains("task.tau = 10\n") && echo.contains("feature.u = 12\n"),
        "{echo}"
    );
}

type Context<'a> = &'a [(&'a str, &'a str)];

/// Runs `context` with and without `key = value` and returns both outputs.
fn toggled(context: &[(&str, &str)], key: &str, value: &str) -> (String, String) {
    let outputs: Vec<String> = [None, Some(value)]
        .iter()
        .map(|v| {
            let d = TempDir::new().unwrap();
            let mut args = vec!["run".to_string(), "--out-dir".into(), dir_arg(&d).into()];
            for (k, v) in context {
                args.extend(["--set".into(), format!("{k}={v}")]);
            }
            if let Some(v) = v {
                args.extend(["--set".into(), format!("{key}={v}")]);
            }
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            let out = qngrc(&refs);
            let status = if out.status.success() {
                "ok".to_string()
            } else {
                String::from_utf8_lossy(&out.stderr).into()
            };
            let mut files: Vec<_> = std::fs::read_dir(d.path())
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            let mut text = status;
            for f in files
                .iter()
                .filter(|f| f.extension().is_some_and(|e| e != "manifest"))
            {
                text.push_str(&format!(
                    "\n== {}\n{}",
                    f.file_name().unwrap().to_string_lossy(),
                    read(f)
                ));
            }
            text
        })
        .collect();
    (outputs[0].clone(), outputs[1].clone())
}

#[test]
fn every_knob_changes_the_output() {
    let lorenz: &[(&str, &str)] = &[("task.name", "lorenz63")];
    let shots: &[(&str, &str)] = &[("task.name", "lorenz63"), ("measurement.mode", "shots")];
    let photonic: &[(&str, &str)] = &[("task.name", "lorenz63"), ("measurement.mode", "photonic")];
    let timer: &[(&str, &str)] = &[("task.name", "timer")];
    let mg: &[(&str, &str)] = &[("task.name", "mackey-glass")];
    let narma: &[(&str, &str)] = &[("task.name", "narma5")];
    let cases: Vec<(Context, &str, &str)> = vec![
        (lorenz, "task.name", "double-scroll"),
        (narma, "task.order", "6"),
        (lorenz, "task.transient", "900"),
        (lorenz, "task.flush", "150"),
        (lorenz, "task.train", "900"),
        (lorenz, "task.test", "200"),
        (lorenz, "task.dt", "0.011"),
        (lorenz, "task.sample_every", "2"),
        (lorenz, "task.init", "1,2,3"),
        (timer, "task.tau", "7"),
        (timer, "task.k_start", "4"),
        (mg, "task.tau_mg", "16"),
        (lorenz, "task.normalize", "raw"),
        (lorenz, "feature.u", "3"),
        (lorenz, "feature.q", "2"),
        (lorenz, "feature.s", "3"),
        (lorenz, "feature.target", "delta"),
        (lorenz, "readout.ridge", "0.01"),
        (lorenz, "readout.solver", "pinv"),
        (lorenz, "measurement.mode", "shots"),
        (shots, "measurement.shots", "1000"),
        (photonic, "measurement.visibility", "0.99"),
        (photonic, "measurement.rate", "1000"),
        (photonic, "measurement.time", "0.01"),
        (shots, "measurement.signs", "drop"),
        (lorenz, "metrics.valid_threshold", "0.001"),
        (shots, "run.seed", "1"),
        (lorenz, "output.prefix", "renamed"),
    ];
    let mut silent = Vec::new();
    for (context, key, value) in cases {
        let (base, changed) = toggled(context, key, value);
        if base == changed {
            silent.push(key);
        }
    }
    assert!(silent.is_empty(), "knobs with no effect: {silent:?}");
}

#[test]
fn output_dir_comes_from_the_environment() {
    let d = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qngrc"))
        .args(["run", "--task", "timer"])
        .env("QNGRC_OUT_DIR", d.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.path().join("timer.metrics.json").is_file());
    let echo = read(d.path().join("timer.manifest"));
    assert!(
        echo.contains(&format!("output.dir = {}", d.path().display())),
        "{echo}"
    );
}

#[test]
fn sweep_reports_feature_counts() {
    let d = TempDir::new().unwrap();
    let stdout = ok(&[
        "sweep",
        "--task",
        "lorenz63",
        "--grid",
        "feature.s=1,2,3",
        "--out-dir",
        dir_arg(&d),
    ]);
    let table = read(d.path().join("lorenz63.sweep.csv"));
    assert_eq!(stdout.lines().next(), table.lines().next());
    let header: Vec<&str> = table.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "feature_columns").unwrap();
    let counts: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap())
        .collect();
    assert_eq!(counts, ["13", "28", "63"]);
    assert!(d
        .path()
        .join("lorenz63.sweep")
        .join("point1-rep0.metrics.json")
        .is_file());
}

#[test]
fn sweep_replicates_seeds_and_marks_failures() {
    let d = TempDir::new().unwrap();
    ok(&[
        "sweep",
        "--task",
        "lorenz63",
        "--set",
        "measurement.mode=shots",
        "--grid",
        "measurement.shots=0,1000000",
        "--seeds",
        "2",
        "--out-dir",
        dir_arg(&d),
    ]);
    let table = read(d.path().join("lorenz63.sweep.csv"));
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert!(
        rows[0].contains(",0,2,failed,measurement.invalid_backend_params,"),
        "{table}"
    );
    assert!(rows[1].contains(",2,0,ok,,"), "{table}");
    assert!(d
        .path()
        .join("lorenz63.sweep")
        .join("point0-rep1.error")
        .is_file());
}

#[test]
fn bench_lists_and_runs_recipes() {
    let listed = ok(&["bench", "--list"]);
    assert_eq!(listed.lines().count(), 12);
    assert!(listed.lines().any(|l| l == "narma20"));
    let d = TempDir::new().unwrap();
    let stdout = ok(&[
        "bench",
        "--only",
        "timer-tau6",
        "--only",
        "lorenz63",
        "--out-dir",
        dir_arg(&d),
    ]);
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("PASS")).count(),
        2,
        "{stdout}"
    );
    let summary = read(d.path().join("bench.summary.csv"));
    assert_eq!(summary.lines().count(), 3);
    assert!(d.path().join("timer-tau6.metrics.json").is_file());
    assert_eq!(code(&["bench", "--only", "nope"]).0, 2);
}

#[test]
fn correlation_curve_visibility() {
    let d = TempDir::new().unwrap();
    let stdout = ok(&[
        "generate",
        "--curve",
        "--visibility",
        "1",
        "--out-dir",
        dir_arg(&d),
    ]);
    assert!(stdout.contains("measured visibility 1.0000"), "{stdout}");
    let csv = read(d.path().join("correlation-curve.csv"));
    assert_eq!(csv.lines().next(), Some("angle_deg,counts"));
    assert_eq!(csv.lines().count(), 1 + 37);
    assert!(d.path().join("correlation-curve.manifest").is_file());
}
