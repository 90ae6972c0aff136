use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qgan_core::store::{random_tensor, read_weights, write_weights, TensorKind};
use qgan_core::Tensor;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn qgan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgan"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn qgan")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn quantize_report_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let input = golden("pair.qgw");
    let o = qgan(dir.path(), &["--json", "quantize", "--in", input.to_str().unwrap(), "--out", "q.qgw", "--scheme", "em", "--bits", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), read(golden("quantize_pair.json")));
    let out = read_weights(dir.path().join("q.qgw")).unwrap();
    assert_eq!(out[0].data(), &[-1.0, -1.0, 1.0, 1.0]);
}

#[test]
fn tanh_two_bit_on_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    write_weights(dir.path().join("g.qgw"), &[random_tensor(TensorKind::Gaussian, 1000, 3)]).unwrap();
    let o = qgan(dir.path(), &["--json", "quantize", "--in", "g.qgw", "--out", "q.qgw", "--scheme", "tanh", "--bits", "2"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["tensors"][0]["states_used"].as_u64().unwrap() <= 4);
    assert!(report["tensors"][0]["em_iterations"].is_null());
    let q = read_weights(dir.path().join("q.qgw")).unwrap();
    assert!(q[0].data().iter().all(|v| v.is_finite()));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = golden("pair.qgw");
    let i = input.to_str().unwrap();
    for args in [
        vec!["quantize", "--in", i, "--out", "q.qgw", "--bits", "0"],
        vec!["quantize", "--in", i, "--out", "q.qgw", "--bits", "2", "--scheme", "nope"],
        vec!["quantize", "--in", i, "--out", "q.qgw", "--bits", "2", "--delta", "1.5"],
        vec!["analyze", "--in", i, "--bins", "1"],
        vec!["search", "--quality", "1.01"],
        vec!["search", "--quality", "0"],
        vec!["search", "--quality", "0.5", "--mock", "0.3d"],
        vec!["sweep", "--bits", "3..2"],
        vec!["sweep", "--bits", "1..2", "--modes", "x"],
        vec!["train", "--d-bits", "17"],
        vec!["train", "--bogus"],
        vec![],
    ] {
        let o = qgan(dir.path(), &args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&qgan(dir.path(), &["--help"])), 0);
}

#[test]
fn bad_archives_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.qgw"), b"NOPE\0\0\0\0").unwrap();
    let golden_bytes = std::fs::read(golden("pair.qgw")).unwrap();
    std::fs::write(dir.path().join("short.qgw"), &golden_bytes[..golden_bytes.len() - 3]).unwrap();
    for file in ["bad.qgw", "short.qgw", "missing.qgw"] {
        let o = qgan(dir.path(), &["quantize", "--in", file, "--out", "q.qgw", "--bits", "2"]);
        assert_eq!(code(&o), 2, "{file}");
        let o = qgan(dir.path(), &["analyze", "--in", file]);
        assert_eq!(code(&o), 2, "{file}");
    }
}

#[test]
fn analyze_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let input = golden("pair.qgw");
    let o = qgan(dir.path(), &["--out", "a", "analyze", "--in", input.to_str().unwrap(), "--bins", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path().join("a/summary.json")), read(golden("analyze_pair.json")));
    assert_eq!(read(dir.path().join("a/hist_w.csv")), "bin_lo,bin_hi,count\n-1,-0.5,2\n-0.5,0,0\n0,0.5,0\n0.5,1,2\n");
}

#[test]
fn analyze_constant_and_quantized_archives() {
    let dir = tempfile::tempdir().unwrap();
    write_weights(dir.path().join("c.qgw"), &[Tensor::from_vec("c", vec![0.5; 9]).unwrap()]).unwrap();
    let o = qgan(dir.path(), &["--json", "--out", "c", "analyze", "--in", "c.qgw"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tensors"][0]["std"], 0.0);

    write_weights(dir.path().join("g.qgw"), &[random_tensor(TensorKind::Gaussian, 2000, 8)]).unwrap();
    assert_eq!(code(&qgan(dir.path(), &["quantize", "--in", "g.qgw", "--out", "q.qgw", "--scheme", "minmax", "--bits", "2"])), 0);
    assert_eq!(code(&qgan(dir.path(), &["--out", "h", "analyze", "--in", "q.qgw", "--bins", "4"])), 0);
    let csv = read(dir.path().join("h/hist_gaussian.csv"));
    let occupied = csv.lines().skip(1).filter(|l| !l.ends_with(",0")).count();
    assert!(occupied <= 4);
}

#[test]
fn mock_search_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgan(dir.path(), &["--json", "--out", "s", "search", "--quality", "0.85", "--mock", "0.3d,0.25g"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path().join("s/search.json")), read(golden("search_mock.json")));
    assert_eq!(stdout(&o), read(golden("search_mock.json")));
}

#[test]
fn unsatisfied_search_exits_two_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--out", "s", "search", "--quality", "0.9", "--max-bits", "2", "--mock", "0.1d,0.1g"];
    let o = qgan(dir.path(), &args);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_str(&read(dir.path().join("s/search.json"))).unwrap();
    assert_eq!(v["satisfied"], false);
    assert_eq!(v["trail"].as_array().unwrap().len(), 2);
    let mut allowed = args.to_vec();
    allowed.push("--allow-unsat");
    assert_eq!(code(&qgan(dir.path(), &allowed)), 0);
}

#[test]
fn mock_sweep_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgan(dir.path(), &["--out", "w", "sweep", "--bits", "1..4", "--mock", "0.3d,0.25g", "--jobs", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path().join("w/sweep.csv")), read(golden("sweep_mock.csv")));
    let o = qgan(dir.path(), &["--out", "x", "sweep", "--bits", "1..2", "--modes", "d,g", "--mock", "0.3d,0.25g"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path().join("x/sweep.csv")).lines().count(), 1 + 4);
}

#[test]
fn zero_step_training() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgan(dir.path(), &["--out", "t", "train", "--steps", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(dir.path().join("t/history.csv")), "step,d_loss,g_loss,score\n");
    assert_eq!(read(dir.path().join("t/summary.json")), read(golden("train_zero.json")));
    let ckpt = read_weights(dir.path().join("t/checkpoint.qgw")).unwrap();
    let names: Vec<&str> = ckpt.iter().map(|t| t.name()).collect();
    assert_eq!(names, ["g.0.w", "g.0.b", "g.1.w", "g.1.b", "g.2.w", "g.2.b", "d.0.w", "d.0.b", "d.1.w", "d.1.b", "d.2.w", "d.2.b"]);
}

#[test]
fn training_artifacts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let args = ["--out", out, "--seed", "9", "train", "--steps", "40", "--eval-every", "10", "--eval-samples", "400", "--batch-size", "32", "--d-bits", "2", "--g-bits", "2"];
        assert_eq!(code(&qgan(dir.path(), &args)), 0);
    };
    run("a");
    run("b");
    for f in ["history.csv", "checkpoint.qgw", "summary.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let history = read(dir.path().join("a/history.csv"));
    assert_eq!(history.lines().count(), 1 + 4);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path().join("a/summary.json"))).unwrap();
    assert!(summary["class"].is_string());
}
