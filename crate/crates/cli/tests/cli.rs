use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blendplan"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen_tiny(dir: &Path, seed: u32) {
    let o = run(&["gen", "--kind", "tiny", "--seed", &seed.to_string(), "-o", "inst.json"], dir);
    assert!(o.status.success(), "{o:?}");
}

#[test]
fn solve_then_audit_and_loss() {
    let d = tempfile::tempdir().unwrap();
    gen_tiny(d.path(), 3);
    assert!(run(&["validate", "inst.json"], d.path()).status.success());

    let o = run(&["solve", "inst.json", "--time-limit", "30", "-o", "out"], d.path());
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["violations"], 0);
    for f in ["plan.json", "trace.json", "trace.csv", "audit.json", "loss.json"] {
        assert!(d.path().join("out/inst-center-flat").join(f).exists(), "{f}");
    }
    assert!(d.path().join("out/results.csv").exists());

    let plan = "out/inst-center-flat/plan.json";
    assert_eq!(run(&["audit", "inst.json", plan], d.path()).status.code(), Some(0));
    let l = run(&["loss", "inst.json", plan], d.path());
    let l: serde_json::Value = serde_json::from_str(&stdout(&l)).unwrap();
    assert!(l["pct_loss"].as_f64().unwrap() >= 0.0);

    let s = run(&["simulate", "inst.json", plan, "--csv", "t.csv"], d.path());
    assert!(s.status.success());
    let csv = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    assert!(csv.starts_with("day,"));
}

#[test]
fn audit_violation_exits_one() {
    let d = tempfile::tempdir().unwrap();
    gen_tiny(d.path(), 3);
    assert!(run(&["solve", "inst.json", "--time-limit", "30", "-o", "out"], d.path()).status.success());
    // Drop every unload indicator while the flows stay.
    let path = d.path().join("out/inst-center-flat/plan.json");
    let mut plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let unloaded: f64 = plan["y_in"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|b| b.as_array().unwrap())
        .flat_map(|q| q.as_array().unwrap())
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!(unloaded > 0.0);
    for row in plan["gamma"].as_array_mut().unwrap() {
        for g in row.as_array_mut().unwrap() {
            *g = serde_json::json!(0);
        }
    }
    std::fs::write(&path, plan.to_string()).unwrap();
    let o = run(&["audit", "inst.json", "out/inst-center-flat/plan.json"], d.path());
    assert_eq!(o.status.code(), Some(1), "{o:?}");
}

#[test]
fn missing_input_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["solve", "nope.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
}

#[test]
fn bad_method_exits_two() {
    let d = tempfile::tempdir().unwrap();
    gen_tiny(d.path(), 1);
    let o = run(&["solve", "inst.json", "--method", "simplex"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_writes_model_and_sidecar() {
    let d = tempfile::tempdir().unwrap();
    gen_tiny(d.path(), 1);
    let o = run(&["export", "inst.json", "--method", "mccormick", "--eps-hat", "0.5", "-o", "ex"], d.path());
    assert!(o.status.success(), "{o:?}");
    assert!(d.path().join("ex/mccormick.mps").exists());
    assert!(d.path().join("ex/mccormick.json").exists());
    let o = run(&["export", "inst.json", "--method", "exact-split-export", "-o", "ex"], d.path());
    assert!(o.status.success());
    let lp = std::fs::read_to_string(d.path().join("ex/exact-split-export.lp")).unwrap();
    assert!(lp.contains("Subject To"));
}

#[test]
fn bench_writes_results_and_profiles() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"[
        {"instance": {"kind": "tiny", "seed": 1}, "method": "center", "eps_hat": [1.0]},
        {"instance": {"kind": "tiny", "seed": 2}, "method": "mccormick", "eps_hat": [0.5]}
    ]"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    let o = run(&["bench", "--config", "c.json", "--jobs", "2", "--time-limit", "20", "-o", "b"], d.path());
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(d.path().join("b/results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("tiny-s1") && lines[1].contains("center"));
    assert!(lines[2].contains("tiny-s2") && lines[2].contains("mccormick"));
    assert!(d.path().join("b/profile_time.csv").exists());
    assert!(d.path().join("b/profile_loss.csv").exists());
}

#[test]
fn rolling_solve_runs() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--kind", "small", "--seed", "2", "--horizon", "10", "-o", "s.json"], d.path());
    assert!(o.status.success());
    let o = run(
        &["solve", "s.json", "--scheme", "full", "--periods", "fixed", "--dt", "4", "--time-limit", "60", "-o", "r"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["scheme"], "full");
    assert!(rec["steps"].as_u64().unwrap() >= 2);
    assert!(d.path().join("r/s-center-full/steps.jsonl").exists());
}
