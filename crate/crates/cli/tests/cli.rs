use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bell(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bell")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn quantum_run_violates_and_analyze_reproduces_report() {
    let tmp = TempDir::new().unwrap();
    let o = bell(&["run", "--strategy", "quantum", "--n", "200000", "--out", "q"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("polytope: nonlocal"));
    let out = tmp.path().join("q");
    for f in ["trials.jsonl", "report.json", "summary.csv", "trajectory.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let r = report(&out);
    let value = r["bell_statistic"]["value"].as_f64().unwrap();
    let se = r["bell_statistic"]["stderr"].as_f64().unwrap();
    assert!((value - (2f64.sqrt() - 1.0)).abs() <= 4.0 * se);
    assert_eq!(r["strategy_class"], "quantum");
    assert_eq!(r["locality_violating"], true);

    let a = bell(&["analyze", "q/trials.jsonl"], tmp.path());
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), fs::read_to_string(out.join("report.json")).unwrap());

    let trajectory = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(trajectory.lines().next(), Some("trial_index,S_n"));
    assert_eq!(trajectory.lines().count(), 200_002);
}

#[test]
fn constant_run_is_exactly_minus_two() {
    let tmp = TempDir::new().unwrap();
    let o = bell(&["run", "--strategy", "constant", "--table", "+1,+1,+1,+1", "--n", "1000", "--out", "c"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&tmp.path().join("c"));
    assert_eq!(r["bell_statistic"]["value"].as_f64(), Some(-2.0));
    assert_eq!(r["locality_violating"], false);
    let first_record = fs::read_to_string(tmp.path().join("c/trials.jsonl")).unwrap().lines().nth(1).unwrap().to_string();
    assert!(first_record.contains("\"table\":[1,1,1,1]"), "{first_record}");
}

#[test]
fn greedy_run_from_toml_config() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("greedy.toml"),
        "n_trials = 20000\nsetting_seed = 5\n\n[strategy]\nname = \"greedy-memory\"\n",
    )
    .unwrap();
    let o = bell(&["run", "--config", "greedy.toml", "--out", "g"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&tmp.path().join("g"));
    let value = r["bell_statistic"]["value"].as_f64().unwrap();
    let se = r["bell_statistic"]["stderr"].as_f64().unwrap();
    assert!(value <= 4.0 * se);
    assert_eq!(r["setting_seed"], 5);
}

#[test]
fn runs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    for out in ["a", "b"] {
        let o = bell(&["run", "--strategy", "iid-random", "--weights", "uniform", "--n", "5000", "--out", out], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["trials.jsonl", "report.json", "summary.csv", "trajectory.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn analyze_names_missing_pairs() {
    let tmp = TempDir::new().unwrap();
    let lines: String = (0..5)
        .map(|k| format!("{{\"trial_index\":{k},\"a\":1,\"b\":1,\"x\":1,\"y\":1,\"mode\":\"sequential\",\"strategy_class\":\"lhv\"}}\n"))
        .collect();
    fs::write(tmp.path().join("short.jsonl"), lines).unwrap();
    let o = bell(&["analyze", "short.jsonl"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("insufficient data") && err.contains("12, 21, 22"), "{err}");
}

#[test]
fn analyze_detects_truncated_log() {
    let tmp = TempDir::new().unwrap();
    assert!(bell(&["run", "--strategy", "greedy-memory", "--n", "100", "--out", "t"], tmp.path()).status.success());
    let path = tmp.path().join("t/trials.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().take(50).collect();
    fs::write(&path, kept.join("\n") + "\n").unwrap();
    let o = bell(&["analyze", "t/trials.jsonl"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("100"), "{}", stderr(&o));
}

fn behavior_file(dir: &Path, name: &str, p: impl Fn(i32, i32, u8, u8) -> f64) -> String {
    let mut cells = serde_json::Map::new();
    for x in [1, -1] {
        for y in [1, -1] {
            for a in [1u8, 2] {
                for b in [1u8, 2] {
                    let key = format!("{},{},{a},{b}", if x > 0 { "+1" } else { "-1" }, if y > 0 { "+1" } else { "-1" });
                    cells.insert(key, serde_json::json!(p(x, y, a, b)));
                }
            }
        }
    }
    let path = dir.join(name);
    fs::write(&path, serde_json::json!({ "p": cells }).to_string()).unwrap();
    name.to_string()
}

#[test]
fn check_behavior_verdicts() {
    let tmp = TempDir::new().unwrap();
    let uniform = behavior_file(tmp.path(), "uniform.json", |_, _, _, _| 0.25);
    let o = bell(&["check-behavior", &uniform], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("no-signalling: pass; local: yes"), "{}", stdout(&o));

    let angles = ([0.0f64, 135.0], [67.5f64, 22.5]);
    let quantum = behavior_file(tmp.path(), "quantum.json", |x, y, a, b| {
        let d = (angles.0[a as usize - 1] - angles.1[b as usize - 1]).to_radians();
        (1.0 + f64::from(x * y) * (2.0 * d).cos()) / 4.0
    });
    let o = bell(&["check-behavior", &quantum], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("local: NO (facet 2.8284 > 2)"), "{}", stdout(&o));

    let pr = behavior_file(tmp.path(), "pr.json", |x, y, a, b| {
        let correlated = !(a == 2 && b == 2);
        if (x == y) == correlated {
            0.5
        } else {
            0.0
        }
    });
    let o = bell(&["check-behavior", &pr], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("local: NO (facet 4 > 2)"), "{}", stdout(&o));
    assert!(stdout(&o).contains("exact rational"));

    let signalling = behavior_file(tmp.path(), "sig.json", |x, _, a, b| match (a, b) {
        (1, 1) if x == 1 => 0.45,
        (1, 1) => 0.05,
        _ => 0.25,
    });
    let o = bell(&["check-behavior", &signalling], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("no-signalling: FAIL"));

    fs::write(tmp.path().join("bad.json"), r#"{"p": {"+1,+1,1,1": 1.5}}"#).unwrap();
    assert_eq!(bell(&["check-behavior", "bad.json"], tmp.path()).status.code(), Some(2));
}

#[test]
fn demo_is_deterministic_and_flags_small_runs() {
    let tmp = TempDir::new().unwrap();
    let first = bell(&["demo", "--n", "20000", "--out", "d1"], tmp.path());
    let second = bell(&["demo", "--n", "20000", "--out", "d2"], tmp.path());
    assert!(first.status.success(), "{}", stderr(&first));
    let strip = |s: String| s.lines().filter(|l| !l.starts_with("trajectories")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(stdout(&first)), strip(stdout(&second)));
    let text = stdout(&first);
    for label in ["constant", "periodic", "greedy-memory", "quantum"] {
        assert!(text.lines().any(|l| l.starts_with(label)), "{label} missing:\n{text}");
        assert!(tmp.path().join(format!("d1/{label}-trajectory.csv")).exists());
    }
    let quantum_line = text.lines().find(|l| l.starts_with("quantum")).unwrap();
    assert!(quantum_line.contains("locality-violating") && quantum_line.contains("~sqrt2-1"), "{quantum_line}");
    assert_eq!(fs::read(tmp.path().join("d1/summary.csv")).unwrap(), fs::read(tmp.path().join("d2/summary.csv")).unwrap());

    let small = bell(&["demo", "--n", "16", "--out", "d3"], tmp.path());
    assert!(small.status.success(), "{}", stderr(&small));
    let rows: Vec<String> = stdout(&small).lines().skip(1).take(4).map(String::from).collect();
    assert!(rows.iter().all(|l| l.contains("wide-CI")), "{rows:?}");
}

#[test]
fn config_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let cases: [&[&str]; 5] = [
        &["run", "--strategy", "constant", "--n", "10"],
        &["run", "--strategy", "warp-drive", "--n", "10"],
        &["run", "--strategy", "greedy-memory", "--n", "0"],
        &["run", "--strategy", "greedy-memory", "--n", "10", "--mode", "galaxy"],
        &["run", "--strategy", "iid-random", "--weights", "0.5,0.5", "--n", "10"],
    ];
    for args in cases {
        let o = bell(args, tmp.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("config error"), "{args:?}: {}", stderr(&o));
    }
    assert!(!tmp.path().join("bell-out").exists());
}

#[test]
fn readme_strategy_examples_run() {
    let tmp = TempDir::new().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["run", "--strategy", "periodic", "--tables", "1,1,1,1;-1,-1,-1,-1", "--n", "2000", "--out", "p"], "lhv"),
        (&["run", "--strategy", "cheat", "--target", "pr-box-aligned", "--n", "2000", "--out", "x"], "nonlocal"),
        (&["run", "--strategy", "quantum", "--n", "2000", "--mode", "galaxy", "--out", "gx"], "quantum"),
    ];
    for (args, class) in cases {
        let o = bell(args, tmp.path());
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let r = report(&tmp.path().join(args[args.len() - 1]));
        assert_eq!(r["strategy_class"], class);
    }
    assert_eq!(report(&tmp.path().join("p"))["bell_statistic"]["value"].as_f64(), Some(-2.0));
    let cheat = report(&tmp.path().join("x"));
    assert_eq!(cheat["bell_statistic"]["value"].as_f64(), Some(1.0));
    assert_eq!(cheat["polytope"]["verdict"], "nonlocal");
    assert_eq!(report(&tmp.path().join("gx"))["mode"], "galaxy");
}
