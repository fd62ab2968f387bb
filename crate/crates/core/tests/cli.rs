use std::path::Path;
use std::process::Command;

fn expsynth(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_expsynth"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "ok.json", r#"{"model": {"kind": "simple_example"}}"#);
    write(
        d,
        "integer.json",
        r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "explicit", "rho": [1024, 2048], "d": [4, 4.6]}}"#,
    );
    write(d, "empty.json", "{}");
    write(d, "broken.json", r#"{"model": "#);
    write(
        d,
        "unknown.json",
        r#"{"model": {"kind": "simple_example"}, "breaker": {"etta": 0.1}}"#,
    );

    assert_eq!(
        expsynth(d, &["validate", "--config", "ok.json", "--out", "v.json"]).0,
        0
    );

    let (code, _) = expsynth(
        d,
        &["validate", "--config", "integer.json", "--out", "i.json"],
    );
    assert_eq!(code, 1);
    let report = std::fs::read_to_string(d.join("i.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    let failed: Vec<&str> = v["family"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["center_integer_distance"]);

    let (code, err) = expsynth(d, &["validate", "--config", "empty.json"]);
    assert_eq!(code, 3);
    assert!(err.contains("model"), "{err}");
    let (code, err) = expsynth(d, &["validate", "--config", "unknown.json"]);
    assert_eq!(code, 3);
    assert!(err.contains("etta"), "{err}");
    assert_eq!(expsynth(d, &["validate", "--config", "broken.json"]).0, 3);
    assert_eq!(expsynth(d, &["validate", "--config", "missing.json"]).0, 3);
    assert_eq!(expsynth(d, &["validate"]).0, 3);
    assert_eq!(expsynth(d, &["frobnicate"]).0, 3);
    assert_eq!(
        expsynth(d, &["validate", "--config", "ok.json", "--window", "1000"]).0,
        3
    );
}

#[test]
fn example_tables_have_fixed_headers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["simple_example", "kadets"] {
        let csv = format!("{name}.csv");
        let json = format!("{name}.json");
        assert_eq!(
            expsynth(d, &["example", name, "--csv", &csv, "--out", &json]).0,
            0
        );
        let text = std::fs::read_to_string(d.join(&csv)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,G"));
        assert!(lines.count() > 100);
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(d.join(&json)).unwrap()).unwrap();
        assert!(!v["zeros"].as_array().unwrap().is_empty());
    }
    assert_eq!(expsynth(d, &["example", "nonesuch"]).0, 3);
    // only the two tables and two reports, no leftover temporaries
    assert_eq!(std::fs::read_dir(d).unwrap().count(), 4);
}

#[test]
fn certify_writes_both_series() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "c.json",
        r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "powers_of_two", "k_min": 4, "k_max": 9,
                       "d_rule": {"kind": "ratio", "value": 0.0625}},
            "weights": {"kind": "uniform", "value": 1.0},
            "truncation": {"window": 1024}}"#,
    );
    let (code, err) = expsynth(
        d,
        &[
            "certify", "--config", "c.json", "--out", "c.out", "--csv", "c.csv",
        ],
    );
    assert_eq!(code, 0, "{err}");
    let cond = std::fs::read_to_string(d.join("c.csv")).unwrap();
    assert!(cond.starts_with("k,cond_i,cond_ii,C1,Nk_size\n"));
    assert_eq!(cond.lines().count(), 7);
    let roots = std::fs::read_to_string(d.join("c.roots.csv")).unwrap();
    assert!(roots.starts_with("n,t_root,eps,in_Nk\n"));
}

#[test]
fn certify_fails_without_a_divergence_rule() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "c.json",
        r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "powers_of_two", "k_min": 4, "k_max": 9,
                       "d_rule": {"kind": "power", "exponent": 0.5}},
            "weights": {"kind": "uniform", "value": 1.0},
            "truncation": {"window": 1024}}"#,
    );
    assert_eq!(
        expsynth(d, &["certify", "--config", "c.json", "--out", "c.out"]).0,
        1
    );
}

#[test]
fn defect_rejects_bad_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "ok.json", r#"{"model": {"kind": "simple_example"}}"#);
    for spec in ["nonsense", "explicit:", "explicit:1,abc"] {
        let (code, err) = expsynth(d, &["defect", "--config", "ok.json", "--partition", spec]);
        assert_eq!(code, 3, "{spec}: {err}");
    }
}

#[test]
fn breaker_non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "b.json",
        r#"{"model": {"kind": "simple_example"},
            "family": {"kind": "powers_of_two", "k_min": 10, "k_max": 12, "center_shift": -0.5,
                       "d_rule": {"kind": "power", "exponent": 0.2}},
            "truncation": {"window": 32768},
            "breaker": {"fp_max_iter": 1, "fp_tol": 1e-300}}"#,
    );
    let (code, err) = expsynth(d, &["break", "--config", "b.json", "--out", "b.out"]);
    assert_eq!(code, 2, "{err}");
}
