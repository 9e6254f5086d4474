use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tml"))
        .args(args)
        .env_remove("TML_GRID_SCALE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write_curve(path: &Path, n: usize, f: impl Fn(f64) -> [f64; 4]) {
    let mut s = String::from("t,x1,y1,x2,y2\n");
    for k in 0..n {
        let t = TAU * k as f64 / n as f64;
        let p = f(t);
        writeln!(s, "{t},{},{},{},{}", p[0], p[1], p[2], p[3]).unwrap();
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn classify_examples() {
    let out = tml(&["group", "classify", "--matrix", "0,1,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["tag"], "GmuMinus");
    let out = tml(&["group", "classify", "--matrix", "1,1,0,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["tag"], "NotMember");
    let out = tml(&["group", "classify", "--matrix", "-1,0,0,-1"]);
    assert_eq!(json(&out)["tag"], "Xo");
}

#[test]
fn decompose_and_defect() {
    let out = tml(&["group", "decompose", "--matrix", "-1,0,0,1", "--target", "x"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["word"], serde_json::json!(["R1"]));
    assert_eq!(v["verified"], true);
    let out = tml(&["group", "defect", "--matrix", "1,1,0,1"]);
    let v = json(&out);
    assert_eq!(v["defect"], serde_json::json!({"m1": 0, "m2": 2}));
    assert_eq!(v["verified"], false);
    let out = tml(&["group", "match-maslov", "--nu", "6,10"]);
    assert_eq!(json(&out)["matrix"], "2,3,1,2");
}

#[test]
fn non_member_decomposition_fails_the_check() {
    let out = tml(&["group", "decompose", "--matrix", "1,1,0,1", "--target", "e"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(tml(&["group", "classify", "--matrix", "1,2,3"]).status.code(), Some(2));
    assert_eq!(tml(&["group", "classify", "--matrix", "2,0,0,1"]).status.code(), Some(2));
    assert_eq!(tml(&["group", "classify", "--bogus"]).status.code(), Some(2));
    assert_eq!(tml(&["frobnicate"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_tml"))
        .args(["group", "classify", "--matrix", "1,0,0,1"])
        .env("TML_GRID_SCALE", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn maslov_class_example() {
    let out = tml(&["maslov", "class", "--a", "1", "--b", "1", "--n1", "1", "--n2", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["index"], 2);
    assert_eq!(v["samples"], 256);
    let out = tml(&["maslov", "class", "--a", "1", "--b", "3", "--n1", "-1", "--n2", "1", "--samples", "512"]);
    assert_eq!(json(&out)["index"], 0);
}

#[test]
fn maslov_trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("phase.csv");
    let out = tml(&[
        "maslov", "class", "--a", "1", "--b", "1", "--n1", "1", "--n2", "1", "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("t,phase\n"));
    assert_eq!(text.lines().count(), 257);
}

#[test]
fn csv_curve_commands() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("gamma1.csv");
    write_curve(&curve, 256, |t| [2.0 * t.cos(), 2.0 * t.sin(), 0.5, 0.0]);
    let p = curve.to_str().unwrap();
    let out = tml(&["geom", "class", "--curve", p, "--a", "2", "--b", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!((v["n1"].as_i64(), v["n2"].as_i64()), (Some(1), Some(0)));
    // Off the torus.
    assert_eq!(tml(&["geom", "class", "--curve", p, "--a", "1", "--b", "1"]).status.code(), Some(1));
    for m in [0i64, 1, -2] {
        let out = tml(&["maslov", "framing", "--curve", p, "--m", &m.to_string()]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["index"], 2 * m);
    }
}

#[test]
fn malformed_csv_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,x,y\n0,1,2\n").unwrap();
    let out = tml(&["geom", "class", "--curve", bad.to_str().unwrap(), "--a", "1", "--b", "1"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&bad, "t,x1,y1,x2,y2\n0,1,zero,0,0\n").unwrap();
    let out = tml(&["geom", "class", "--curve", bad.to_str().unwrap(), "--a", "1", "--b", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.csv");
    let out = tml(&["geom", "class", "--curve", missing.to_str().unwrap(), "--a", "1", "--b", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn linking_commands() {
    let out = tml(&["linking", "eval", "--a", "1", "--b", "1", "--n1", "0", "--n2", "1", "--eps", "0.1", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rounded"], 0);
    assert_eq!(v["method"], "gauss_integral");

    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("meridian.csv");
    write_curve(&curve, 128, |s| [1.0 + 0.5 * s.cos(), 0.0, 1.0 + 0.5 * s.sin(), 0.0]);
    let surface = dir.path().join("torus.csv");
    let n = 32;
    let mut text = String::from("t1,t2,x1,y1,x2,y2\n");
    for i in 0..n {
        for j in 0..n {
            let (t1, t2) = (TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
            writeln!(text, "{t1},{t2},{},{},{},{}", t1.cos(), t1.sin(), t2.cos(), t2.sin()).unwrap();
        }
    }
    std::fs::write(&surface, text).unwrap();
    let trace = dir.path().join("density.csv");
    let out = tml(&[
        "linking", "raw", "--curve", curve.to_str().unwrap(), "--surface", surface.to_str().unwrap(),
        "--grid", "32", "--oracle", "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["rounded"].as_i64().unwrap().abs(), 1);
    assert_eq!(v["oracle"], v["rounded"]);
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("s,density\n"));
}

#[test]
fn linking_eps_out_of_range() {
    let out = tml(&["linking", "eval", "--a", "1", "--b", "1", "--n1", "1", "--n2", "0", "--eps", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_commands() {
    let out = tml(&["simulate", "case1", "--b", "1", "--samples", "256"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["monodromy"], "0,1,1,0");
    assert_eq!(v["tag"], "GmuMinus");
    let out = tml(&["simulate", "case2", "--b", "1", "--eps", "0.05"]);
    assert_eq!(json(&out)["monodromy"], "1,2,0,-1");
    let out = tml(&["simulate", "case2", "--variant", "--b", "1", "--eps", "0.05"]);
    assert_eq!(json(&out)["monodromy"], "-1,0,2,1");
    let out = tml(&["simulate", "case2", "--b", "1", "--eps", "0.05", "--ns", "256"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn h1map_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("twist.csv");
    let n = 32;
    let mut text = String::from("theta,t,f,g\n");
    for i in 0..n {
        for j in 0..n {
            let (th, t) = (TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
            writeln!(text, "{th},{t},{},{t}", (th + 2.0 * t).rem_euclid(TAU)).unwrap();
        }
    }
    std::fs::write(&map, text).unwrap();
    let out = tml(&["simulate", "h1map", "--map", map.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["matrix"], "1,2,0,1");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = tml(&["group", "classify", "--matrix", "1,2,0,-1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["tag"], "GmuMinus");
}

#[test]
fn verify_all_is_deterministic() {
    let a = tml(&["verify-all", "--only", "5,6,7", "--seed", "7"]);
    let b = tml(&["verify-all", "--only", "5,6,7", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["pass"], true);
    assert!(v["records"].as_array().unwrap().iter().all(|r| r["anchor"].as_str().is_some_and(|s| !s.is_empty())));
}

#[test]
fn verify_all_faults_and_validation() {
    let out = tml(&["verify-all", "--only", "2", "--inject-wrong-expected", "c02.case1"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    let rec = v["records"].as_array().unwrap().iter().find(|r| r["name"] == "c02.case1").unwrap();
    assert_eq!(rec["pass"], false);
    assert_eq!(tml(&["verify-all", "--ns", "512", "--nt", "128"]).status.code(), Some(2));
    assert_eq!(tml(&["verify-all", "--ns", "256"]).status.code(), Some(2));
    assert_eq!(tml(&["verify-all", "--only", "11"]).status.code(), Some(2));
    assert_eq!(tml(&["verify-all", "--inject-wrong-expected", "nope"]).status.code(), Some(2));
}

#[test]
fn grid_scale_applies_to_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_tml"))
        .args(["maslov", "class", "--a", "1", "--b", "1", "--n1", "0", "--n2", "1"])
        .env("TML_GRID_SCALE", "2")
        .output()
        .unwrap();
    assert_eq!(json(&out)["samples"], 512);
}
