mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_mfpencil")).args(args).output().expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), report)
}

fn fx(name: &str) -> String {
    common::fixture(name).display().to_string()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().expect("object").keys().cloned().collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const ENVELOPE: &[&str] =
    &["schema_version", "tool", "version", "command", "status", "exit_code", "tolerances", "result", "error"];
const ANALYSIS: &[&str] = &["points", "structure", "spectrum", "ranks", "classification", "shift"];

#[test]
fn analyze_example_one() {
    let (code, r) = run(&["analyze", &fx("ex1.pencil")]);
    assert_eq!(code, 0);
    let s = &r["result"]["structure"];
    assert_eq!((s["l"].as_u64(), s["d"].as_u64(), s["lhat"].as_u64()), (Some(1), Some(1), Some(1)));
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 81);
}

#[test]
fn analyze_example_two_reports_failed_rank_degree() {
    let (code, r) = run(&["analyze", &fx("ex2.pencil")]);
    assert_eq!(code, 0);
    let s = &r["result"]["structure"];
    assert_eq!((s["l"].as_u64(), s["d"].as_u64(), s["lhat"].as_u64()), (Some(1), Some(0), Some(2)));
    assert_eq!(r["result"]["classification"]["rank_degree"], false);
    assert_eq!(r["result"]["classification"]["rank_b"], 2);
    assert_eq!(r["result"]["classification"]["deg_lambda"], 1);
}

#[test]
fn hypothesis_failures_exit_two_with_kind() {
    for (file, kind) in [
        ("singular.pencil", "SingularPencil"),
        ("complex.pencil", "ComplexRoots"),
        ("rank_change.pencil", "RankChange"),
        ("ex2_rank_jump.pencil", "RankChange"),
    ] {
        let (code, r) = run(&["analyze", &fx(file)]);
        assert_eq!(code, 2, "{file}");
        assert_eq!(r["error"]["kind"], kind, "{file}");
        assert_eq!(r["status"], "error");
        assert!(r["result"].is_null());
    }
}

#[test]
fn missing_file_and_bad_flags_exit_one() {
    let (code, r) = run(&["analyze", "/nonexistent/x.pencil"]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["kind"], "IoError");
    let (code, _) = run(&["analyze"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["analyze", &fx("ex1.pencil"), "--grid", "2"]);
    assert_eq!(code, 1);
}

#[test]
fn canonize_example_one_blocks() {
    let (code, r) = run(&["canonize", &fx("ex1.pencil")]);
    assert_eq!(code, 0);
    let c = &r["result"]["canonical"];
    let points = r["result"]["points"].as_array().unwrap();
    for (k, x) in points.iter().enumerate() {
        let x: Vec<f64> = x.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let j = c["J_blocks"][k][0][0][0].as_f64().unwrap();
        assert!((j - 1.0 / (x[0] + x[1])).abs() <= 1e-8, "J at {x:?}");
    }
    assert!(c["max_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn canonize_example_two_nilpotent_block() {
    let (code, r) = run(&["canonize", &fx("ex2.pencil")]);
    assert_eq!(code, 0);
    for nb in r["result"]["canonical"]["N_block"].as_array().unwrap() {
        let m: Vec<Vec<f64>> = serde_json::from_value(nb.clone()).unwrap();
        let n = mfpencil::linalg::Mat::from_rows(&m);
        assert!(n.norm_fro() >= 1e-3);
        assert!((&n * &n).norm_max() <= 1e-9);
    }
}

#[test]
fn canonize_with_forced_shift_and_grid() {
    let (code, r) = run(&["canonize", &fx("ex1.pencil"), "--shift", "-1", "--grid", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["shift"]["strategy"], "forced");
    assert_eq!(r["result"]["shift"]["constant"], -1.0);
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 9);
    // -x1 - x2 reaches -2 at the corner, so c = -2 is a root there.
    let (code, r) = run(&["canonize", &fx("ex1.pencil"), "--shift", "-2"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "NoShiftFound");
}

#[test]
fn tolerance_flags_reach_the_report() {
    let (code, r) = run(&["analyze", &fx("ex1.pencil"), "--tol-canon", "1e-6", "--tol-rank", "1e-12"]);
    assert_eq!(code, 0);
    assert_eq!(r["tolerances"]["canon"], 1e-6);
    assert_eq!(r["tolerances"]["rank"], 1e-12);
}

#[test]
fn an_impossible_canon_tolerance_fails_the_check() {
    let (code, r) = run(&["canonize", &fx("ex2.pencil"), "--tol-canon", "1e-30"]);
    assert_eq!(code, 4);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["result"]["canonical"]["pass"], false);
}

#[test]
fn verify_reference_transforms() {
    for (pencil, transforms, bound) in [("ex1.pencil", "ex1.transforms", 1e-10), ("ex2.pencil", "ex2.transforms", 1e-9)] {
        let (code, r) = run(&["verify", &fx(pencil), &fx(transforms)]);
        assert_eq!(code, 0, "{pencil}");
        assert!(r["result"]["max_residual"].as_f64().unwrap() <= bound);
        assert_eq!(r["result"]["pass"], true);
    }
}

#[test]
fn verify_rejects_a_tampered_q() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(common::fixture("ex1.transforms")).unwrap();
    let tampered = text.replacen("Q = [\n  [\"1\",", "Q = [\n  [\"1.001\",", 1);
    assert_ne!(tampered, text);
    let path = dir.path().join("bad.transforms");
    std::fs::write(&path, tampered).unwrap();
    let (code, r) = run(&["verify", &fx("ex1.pencil"), path.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert_eq!(r["status"], "fail");
    assert!(!r["result"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_dimension_mismatch_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.transforms");
    std::fs::write(
        &path,
        "P = [[\"1\",\"0\"],[\"0\",\"1\"]]\nQ = [[\"1\",\"0\"],[\"0\",\"1\"]]\ntarget_A = [[\"1\",\"0\"],[\"0\",\"1\"]]\ntarget_B = [[\"1\",\"0\"],[\"0\",\"1\"]]\n",
    )
    .unwrap();
    let (code, r) = run(&["verify", &fx("ex1.pencil"), path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["kind"], "InputError");
}

#[test]
fn gen_then_canonize_recovers_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.pencil");
    let (code, r) = run(&["gen", &fx("ex1_shape.spec"), "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let truth = dir.path().join("g.truth.toml");
    assert!(truth.exists());
    assert_eq!(r["result"]["truth"], truth.display().to_string());
    let (code, r) = run(&["canonize", out.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["truth"]["structure_match"], true);
    assert!(r["result"]["truth"]["max_branch_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();
    for (name, seed) in [("a.pencil", "7"), ("b.pencil", "7"), ("c.pencil", "8")] {
        let out = dir.path().join(name);
        assert_eq!(run(&["gen", &fx("ex1_shape.spec"), "--seed", seed, "--out", out.to_str().unwrap()]).0, 0);
    }
    assert_eq!(read("a.pencil"), read("b.pencil"));
    assert_eq!(read("a.truth.toml"), read("b.truth.toml"));
    assert_ne!(read("a.pencil"), read("c.pencil"));
}

#[test]
fn gen_identity_witness_emits_canonical_pencil() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id.pencil");
    assert_eq!(run(&["gen", &fx("ex1_identity.spec"), "--out", out.to_str().unwrap()]).0, 0);
    let lp = mfpencil::io::load_pencil(&out, None).unwrap();
    for x in [[1.0, 1.0], [1.5, 2.0]] {
        let a = lp.pencil.a.eval("A", &x).unwrap();
        let b = lp.pencil.b.eval("B", &x).unwrap();
        assert_eq!(a, mfpencil::linalg::Mat::diag(&[1.0, 0.0, 1.0]));
        let want = mfpencil::linalg::Mat::diag(&[1.0 / (x[0] + x[1]), 1.0, 0.0]);
        assert!(b.max_abs_diff(&want) < 1e-15);
    }
}

#[test]
fn gen_invalid_spec_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.pencil");
    let (code, r) = run(&["gen", &fx("bad_sum.spec"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["kind"], "InputError");
    assert!(!out.exists());
}

#[test]
fn report_written_atomically_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_mfpencil"))
        .args(["analyze", &fx("ex1.pencil"), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["command"], "analyze");
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

// Golden key sets: the report schema is part of the contract.

#[test]
fn schema_analyze() {
    let (_, r) = run(&["analyze", &fx("ex1.pencil")]);
    assert_eq!(keys(&r), set(ENVELOPE));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["tool"], "mfpencil");
    assert_eq!(keys(&r["result"]), set(ANALYSIS));
    assert_eq!(keys(&r["result"]["structure"]), set(&["n", "d", "l", "lhat", "multiplicities"]));
    assert_eq!(
        keys(&r["result"]["classification"]),
        set(&["rank_a", "rank_b", "deg_lambda", "deg_mu", "rank_degree_lambda", "rank_degree_mu", "rank_degree", "simple_roots"])
    );
    assert_eq!(
        keys(&r["result"]["shift"]),
        set(&["values", "constant", "strategy", "min_root_distance", "min_regularity", "warnings"])
    );
    assert_eq!(
        keys(&r["tolerances"]),
        set(&[
            "rank", "snap", "cluster", "imag", "separation", "regularity", "canon", "eig", "cond_limit", "spectral_gap",
            "continuity", "block_rank", "nilpotent"
        ])
    );
}

#[test]
fn schema_canonize() {
    let (_, r) = run(&["canonize", &fx("ex1.pencil"), "--grid", "3"]);
    assert_eq!(keys(&r), set(ENVELOPE));
    let mut want = set(ANALYSIS);
    want.insert("canonical".into());
    assert_eq!(keys(&r["result"]), want);
    assert_eq!(
        keys(&r["result"]["canonical"]),
        set(&[
            "pass", "P", "Q", "cond_P", "cond_Q", "canonical_A", "canonical_B", "J_blocks", "M_block", "N_block",
            "residual_A", "residual_B", "bound", "max_residual", "warnings"
        ])
    );
}

#[test]
fn schema_verify_and_error() {
    let (_, r) = run(&["verify", &fx("ex1.pencil"), &fx("ex1.transforms"), "--grid", "3"]);
    assert_eq!(keys(&r), set(ENVELOPE));
    assert_eq!(
        keys(&r["result"]),
        set(&["kind", "points", "max_residual", "min_det_margin", "continuity", "continuity_note", "failures", "pass"])
    );
    assert_eq!(
        keys(&r["result"]["points"][0]),
        set(&["x", "residual_a", "residual_b", "bound", "det_margin_p", "det_margin_q"])
    );
    let (_, r) = run(&["analyze", &fx("singular.pencil")]);
    assert_eq!(keys(&r), set(ENVELOPE));
    assert_eq!(keys(&r["error"]), set(&["kind", "stage", "message"]));
}

#[test]
fn schema_gen() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.pencil");
    let (_, r) = run(&["gen", &fx("ex1_shape.spec"), "--out", out.to_str().unwrap()]);
    assert_eq!(keys(&r), set(ENVELOPE));
    assert_eq!(keys(&r["result"]), set(&["seed", "pencil", "truth", "structure"]));
    assert!(Path::new(r["result"]["truth"].as_str().unwrap()).exists());
}
