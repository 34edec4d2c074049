use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn systole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_systole")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_canonical_surfaces() {
    let cc = data("surfaces/calabi_croke.surf");
    let o = systole(&["validate", cc.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("euler characteristic: 2"));
    assert_eq!(text.matches("(0.666667 pi) marked").count(), 3);
    assert!(text.contains("euclidean area: 0.866025403784"));

    let t = data("surfaces/torus_linf.surf");
    let o = systole(&["validate", t.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("euler characteristic: 0"));
    assert!(text.contains("holmes-thompson area: 0.636619772368"));
}

#[test]
fn validate_rejects_mismatched_edges() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(data("surfaces/torus_equilateral.surf")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    // stretch one vertex so a glued pair no longer has equal length
    v["polygons"][0][1][0] = serde_json::json!(1.25);
    let bad = dir.path().join("bad.surf");
    fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let o = systole(&["validate", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let broken = dir.path().join("broken.surf");
    fs::write(&broken, "{\n  \"label\": \"x\",\n  \"polygons\": [\n").unwrap();
    let o = systole(&["validate", broken.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn systole_certificate_json() {
    let t = data("surfaces/tetrahedral.surf");
    let o = systole(&["systole", t.to_str().unwrap(), "--method", "cover_exact"]);
    assert!(o.status.success());
    let cert: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((cert["length"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(cert["admissible"], true);
    assert_eq!(cert["classification"]["kind"], "simple_two_two");
}

#[test]
fn verify_equality_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq.csv");
    let o = systole(&["verify", "--suite", "equality", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "id,computed,expected,tolerance,verdict,ms");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.contains(",pass,")));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let configs = data("configs");
    let mut texts = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = systole(&[
            "verify", "--suite", "random", "--seed", "7", "--count", "40",
            "--configs", configs.to_str().unwrap(), "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        texts.push(fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn unknown_suite_is_usage_error() {
    let o = systole(&["verify", "--suite", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}
