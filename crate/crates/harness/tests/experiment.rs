use std::path::Path;
use std::process::Command;

use maac_harness::{replot, run_experiment, ExperimentSpec, HarnessError};

fn climb_spec(runs: usize, parallelism: usize) -> ExperimentSpec {
    ExperimentSpec::from_json(&format!(
        r#"{{"name":"climb","env":"climb","algorithms":["iac","iacc","jac"],"runs":{runs},
            "seed":5,"parallelism":{parallelism},
            "config":{{"total_steps":1280,"batch_size":32,"eval_episodes":8,"actor_step":0.1}}}}"#
    ))
    .unwrap()
}

fn hashes(dir: &Path) -> Vec<(String, String)> {
    let m: maac_harness::Manifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m.files.into_iter().map(|f| (f.path, f.sha256)).collect()
}

#[test]
fn reruns_and_parallelism_reproduce_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let m = run_experiment(&climb_spec(3, 1), &a, false).unwrap();
    run_experiment(&climb_spec(3, 1), &b, false).unwrap();
    run_experiment(&climb_spec(3, 4), &c, false).unwrap();
    assert_eq!(hashes(&a), hashes(&b));
    // spec.json records the parallelism degree itself
    let results = |d: &Path| -> Vec<_> { hashes(d).into_iter().filter(|(p, _)| p != "spec.json").collect() };
    assert_eq!(results(&a), results(&c));
    assert_eq!(m.runs.len(), 9);
    assert_eq!(m.failures(), 0);
    for f in ["plots/return.svg", "aggregate/JAC.csv", "runs/IAC/run_2.csv", "spec.json"] {
        assert!(m.files.iter().any(|e| e.path == f), "{f} missing from manifest");
    }
    let svg = std::fs::read_to_string(a.join("plots/return.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn adding_runs_keeps_existing_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let small = run_experiment(&climb_spec(2, 2), &tmp.path().join("s"), false).unwrap();
    let big = run_experiment(&climb_spec(4, 2), &tmp.path().join("b"), false).unwrap();
    assert_eq!(small.seeds[..], big.seeds[..2]);
    let a = std::fs::read(tmp.path().join("s/runs/IAC/run_1.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/runs/IAC/run_1.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("x");
    let spec = climb_spec(1, 1);
    run_experiment(&spec, &dir, false).unwrap();
    assert!(matches!(
        run_experiment(&spec, &dir, false),
        Err(HarnessError::OutputExists(_))
    ));
    run_experiment(&spec, &dir, true).unwrap();
}

#[test]
fn single_run_is_flagged_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("one");
    run_experiment(&climb_spec(1, 1), &dir, false).unwrap();
    let agg = std::fs::read_to_string(dir.join("aggregate/IAC.csv")).unwrap();
    assert!(agg.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn gradient_logging_writes_variance_series_and_replots() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("morning");
    let spec = ExperimentSpec::from_json(
        r#"{"name":"morning","env":"morning","algorithms":["iac","iacc"],"runs":2,
            "config":{"total_steps":640,"log_gradients":true,"eval_episodes":4},
            "gradient_window":16}"#,
    )
    .unwrap();
    run_experiment(&spec, &dir, false).unwrap();
    for f in ["runs/IACC/gradients_0.csv", "runs/IACC/gradvar_1.csv", "aggregate/IAC.gradvar.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let before = std::fs::read(dir.join("plots/IACC.gradvar.svg")).unwrap();
    std::fs::remove_dir_all(dir.join("plots")).unwrap();
    replot(&dir).unwrap();
    assert_eq!(std::fs::read(dir.join("plots/IACC.gradvar.svg")).unwrap(), before);
}

#[test]
fn sweep_tags_grid_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::from_json(
        r#"{"name":"sweep","env":"climb","algorithms":["iac"],"runs":1,
            "config":{"total_steps":320,"eval_episodes":2},
            "grid":{"actor_step":[0.01,0.1]}}"#,
    )
    .unwrap();
    let m = run_experiment(&spec, &tmp.path().join("s"), false).unwrap();
    let tags: Vec<_> = m.cells.iter().map(|c| c.tag.as_str()).collect();
    assert_eq!(tags, ["IAC_actor_step=0.01", "IAC_actor_step=0.1"]);
}

fn maac(args: &[&str], root: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_maac"))
        .args(args)
        .env("MAAC_OUTPUT_DIR", root)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();

    let (code, stdout) = maac(&["exact", "climb"], root);
    assert_eq!(code, 0);
    assert!(stdout.contains("gradient residual"));
    assert!(root.join("exact_climb_k1/report.json").exists());

    let (code, _) = maac(&["exact", "move_box"], root);
    assert_eq!(code, 1);

    let bad = root.join("bad.json");
    std::fs::write(&bad, r#"{"name":"b","env":"climb","algorithms":[],"runs":1}"#).unwrap();
    assert_eq!(maac(&["run", bad.to_str().unwrap()], root).0, 1);

    let good = root.join("good.json");
    std::fs::write(
        &good,
        r#"{"name":"g","env":"climb","algorithms":["jac"],"runs":2,"config":{"total_steps":256,"eval_episodes":2}}"#,
    )
    .unwrap();
    assert_eq!(maac(&["run", good.to_str().unwrap()], root).0, 0);
    assert!(root.join("g/manifest.json").exists());
    assert_eq!(maac(&["run", good.to_str().unwrap()], root).0, 1);
    assert_eq!(maac(&["run", good.to_str().unwrap(), "--force"], root).0, 0);
    assert_eq!(maac(&["sweep", good.to_str().unwrap()], root).0, 1);
    assert_eq!(maac(&["plot", root.join("g").to_str().unwrap()], root).0, 0);
}
