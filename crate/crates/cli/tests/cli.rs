use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hvopt_core::harness::{run, RunSpec};
use hvopt_core::objectives::ToyFunction;
use hvopt_core::output::trace_csv;
use serde_json::Value;

fn hvopt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hvopt"))
        .args(args)
        .current_dir(dir)
        .env_remove("HVOPT_OUT")
        .output()
        .expect("binary runs")
}

fn polyline_vertices(svg: &str) -> Vec<usize> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline"))
        .map(|l| l.split("points=\"").nth(1).unwrap().split('"').next().unwrap().split(' ').count())
        .collect()
}

fn race_doc(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn trace_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["trace", "--objective", "f2", "--optimizer", "hvadam", "--steps", "1500", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/f2_hvadam.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,loss,dist_to_opt,theta_0,theta_1,k,delta_hat,b,restarted");
    assert_eq!(lines.len(), 1501);
    assert!(lines[1500].starts_with("1500,"));
}

#[test]
fn trace_matches_library_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["trace", "--objective", "f4", "--optimizers", "adabelief", "--steps", "300", "--out", "."]);
    assert!(out.status.success());
    let spec = RunSpec { steps: 300, ..RunSpec::toy(&ToyFunction::F4, "adabelief").unwrap() };
    let expected = trace_csv(&run(&spec).unwrap());
    assert_eq!(fs::read_to_string(dir.path().join("f4_adabelief.csv")).unwrap(), expected);
}

#[test]
fn unknown_ids_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hvopt(dir.path(), &["trace", "--optimizer", "nadam"]).status.code(), Some(2));
    assert_eq!(hvopt(dir.path(), &["trace", "--objective", "f9"]).status.code(), Some(2));
    assert_eq!(hvopt(dir.path(), &["trace", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(hvopt(dir.path(), &["trace", "--set", "gamma"]).status.code(), Some(2));
    assert_eq!(hvopt(dir.path(), &["trace", "--schedule", "cosine"]).status.code(), Some(2));
    assert_eq!(hvopt(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn plot_flag_emits_one_vertex_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["trace", "--objective", "f1", "--steps", "200", "--record-every", "3", "--plot", "--out", "o"]);
    assert!(out.status.success());
    // rows at t = 3, 6, ..., 198 and the final step
    let rows = 200 / 3 + 1;
    for name in ["f1_hvadam_loss.svg", "f1_hvadam_trajectory.svg"] {
        let svg = fs::read_to_string(dir.path().join("o").join(name)).unwrap();
        assert_eq!(polyline_vertices(&svg), vec![rows], "{name}");
    }
}

#[test]
fn default_race_covers_four_objectives() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["race", "--out", "r"]);
    assert!(out.status.success());
    let jsons: Vec<_> = fs::read_dir(dir.path().join("r"))
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".json"))
        .collect();
    assert_eq!(jsons.len(), 4);

    let f2 = race_doc(&dir.path().join("r/f2_race.json"));
    let runs = f2["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    let step = |r: &Value| r["first_step_within_tol"].as_u64().unwrap_or(u64::MAX);
    let hv = runs.iter().find(|r| r["optimizer"] == "hvadam").unwrap();
    assert!(runs.iter().all(|r| step(hv) <= step(r)));
    assert_eq!(step(hv), 181);
}

#[test]
fn optimizer_subset_runs_exactly_those() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["race", "--optimizers", "hvadam,adam", "--steps", "100", "--plot", "--out", "r"]);
    assert!(out.status.success());
    for f in ["f1", "f2", "f3", "f4"] {
        let doc = race_doc(&dir.path().join(format!("r/{f}_race.json")));
        assert_eq!(doc["runs"].as_array().unwrap().len(), 2, "{f}");
        let svg = fs::read_to_string(dir.path().join(format!("r/{f}_race_trajectory.svg"))).unwrap();
        assert_eq!(polyline_vertices(&svg), vec![100, 100]);
    }
    assert!(!dir.path().join("r/f1_sgdm.csv").exists());
}

#[test]
fn verify_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = hvopt(dir.path(), &["verify", "--seeds", "100"]);
    let b = hvopt(dir.path(), &["verify", "--seeds", "100"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("norm-chain               trials=100"));
    assert!(text.ends_with("5/5 properties passed\n"));
}

#[test]
fn trace_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["trace", "--objective", "logistic-60-4-3-b8", "--seed", "11", "--steps", "200", "--out"];
    let mut first = args.to_vec();
    first.push("a");
    let mut second = args.to_vec();
    second.push("b");
    assert!(hvopt(dir.path(), &first).status.success());
    assert!(hvopt(dir.path(), &second).status.success());
    let read = |d: &str| fs::read(dir.path().join(d).join("logistic-60-4-3-b8_hvadam.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn env_sets_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hvopt"))
        .args(["trace", "--steps", "5"])
        .current_dir(dir.path())
        .env("HVOPT_OUT", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/f2_hvadam.csv").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# short run\nsteps = 10\nhvadam.gamma = 1\n").unwrap();
    let rows = |sub: &str| fs::read_to_string(dir.path().join(sub).join("f2_hvadam.csv")).unwrap().lines().count() - 1;
    assert!(hvopt(dir.path(), &["trace", "--config", "run.cfg", "--out", "a"]).status.success());
    assert_eq!(rows("a"), 10);
    assert!(hvopt(dir.path(), &["trace", "--config", "run.cfg", "--steps", "20", "--out", "b"]).status.success());
    assert_eq!(rows("b"), 20);
    fs::write(dir.path().join("bad.cfg"), "hvadam.warmup = 3\n").unwrap();
    assert_eq!(hvopt(dir.path(), &["trace", "--config", "bad.cfg"]).status.code(), Some(2));
    assert_eq!(hvopt(dir.path(), &["trace", "--config", "missing.cfg"]).status.code(), Some(2));
}

#[test]
fn overflow_is_a_numerical_abort() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["trace", "--objective", "f4", "--optimizer", "sgdm", "--set", "lr=1e200"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_flags_single_best() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvopt(dir.path(), &["sweep", "--objective", "f1", "--steps", "300", "--out", "s"]);
    assert!(out.status.success());
    let doc = race_doc(&dir.path().join("s/f1_hvadam_sweep.json"));
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    assert_eq!(runs.iter().filter(|r| r["best"] == true).count(), 1);
    assert_eq!(runs[0]["assignments"]["lr"], "0.1");

    let out = hvopt(dir.path(), &["sweep", "--grid", "gamma=0,0.5,1", "--grid", "beta1=0.8,0.9", "--steps", "50", "--out", "t"]);
    assert!(out.status.success());
    let doc = race_doc(&dir.path().join("t/f2_hvadam_sweep.json"));
    assert_eq!(doc["runs"].as_array().unwrap().len(), 6);
    assert_eq!(hvopt(dir.path(), &["sweep", "--grid", "gamma="]).status.code(), Some(2));
}

#[test]
fn plot_reads_trace_csvs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hvopt(dir.path(), &["race", "--objective", "f3", "--steps", "40", "--out", "r"]).status.success());
    let out = hvopt(dir.path(), &["plot", "r/f3_hvadam.csv", "r/f3_sgdm.csv", "--out", "p", "--name", "f3"]);
    assert!(out.status.success());
    let svg = fs::read_to_string(dir.path().join("p/f3_trajectory.svg")).unwrap();
    assert_eq!(polyline_vertices(&svg), vec![40, 40]);
    assert!(dir.path().join("p/f3_loss.svg").exists());
    assert_eq!(hvopt(dir.path(), &["plot", "r/f3_race.json"]).status.code(), Some(2));
}
