use std::process::{Command, Output};

use boxcert::oracle::{ideal_chsh_strategy, noisy_family, NoiseModel};

fn boxcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxcert"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn chsh_sweep_writes_one_row_per_point() {
    let out = boxcert(&[
        "sweep", "--scenario", "chsh", "--from", "2.0", "--to", "2.8284", "--points", "25",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bell_value,bound,status,seconds"));
    assert_eq!(lines.count(), 25);
}

#[test]
fn rerun_without_timing_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = boxcert(&[
            "sweep", "--scenario", "chsh", "--from", "2.2", "--to", "2.6", "--points", "3",
            "--no-timing", "--output", p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn tau_endpoint_is_close_to_one() {
    let out = boxcert(&["sweep", "--scenario", "tau", "--isotropic", "--at", "2.8284", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    assert!(points[0]["bound"].as_f64().unwrap() > 0.98);
    assert_eq!(v["flags"]["isotropic"], true);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "chsh", "from": 2.1, "to": 2.4, "points": 4, "solver": {"max_iterations": 200}}"#,
    )
    .unwrap();
    let out = boxcert(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);
    let out = boxcert(&["sweep", "--config", cfg.to_str().unwrap(), "--at", "2.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("2.5,"));
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["sweep"],
        &["sweep", "--scenario", "bb84"],
        &["sweep", "--scenario", "chsh", "--from", "2.5", "--to", "2.0"],
        &["sweep", "--scenario", "chsh", "--points", "0"],
        &["sweep", "--scenario", "chsh", "--localizing"],
        &["sweep", "--scenario", "chsh", "--level", "npa:x"],
        &["sweep", "--scenario", "chsh", "--config", "/nonexistent/run.json"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = boxcert(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_solver_env_override_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_boxcert"))
        .args(["sweep", "--scenario", "chsh", "--at", "2.5"])
        .env("BOXCERT_MAX_ITERATIONS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn all_points_outside_the_quantum_set_is_a_failure() {
    let out = boxcert(&["sweep", "--scenario", "chsh", "--at", "2.9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("infeasible"));
}

#[test]
fn check_passes_and_detects_a_perturbed_swap() {
    let out = boxcert(&["check", "--words", "200"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
    let out = boxcert(&["check", "--words", "10", "--perturb-swap", "1.05"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).lines().any(|l| l.starts_with("FAIL") && l.contains("sandwich")));
}

#[test]
fn simulate_reports_bell_value_and_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let ideal = dir.path().join("ideal.json");
    std::fs::write(&ideal, ideal_chsh_strategy().to_json().unwrap()).unwrap();
    let out = boxcert(&["simulate", ideal.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!((field(&text, "bell_value") - 2.0 * 2f64.sqrt()).abs() < 1e-8);
    assert!((field(&text, "fidelity") - 1.0).abs() < 1e-8);

    let werner = dir.path().join("werner.json");
    let s = noisy_family(&ideal_chsh_strategy(), NoiseModel::Depolarizing, &[0.9]).unwrap();
    std::fs::write(&werner, s[0].to_json().unwrap()).unwrap();
    let out = boxcert(&["simulate", werner.to_str().unwrap(), "--swap", "chsh"]);
    assert!(out.status.success());
    assert!((field(&stdout(&out), "bell_value") - 0.9 * 2.0 * 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn simulate_cglmp_without_aux_uses_the_polar_factor() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cglmp.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&boxcert::oracle::ideal_cglmp_strategy().to_json().unwrap()).unwrap();
    for party in ["alice", "bob"] {
        v[party]["aux"] = serde_json::Value::Array(Vec::new());
    }
    std::fs::write(&path, v.to_string()).unwrap();
    let out = boxcert(&["simulate", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!((field(&text, "bell_value") - (12.0 - 33f64.sqrt()) / 9.0).abs() < 1e-8);
    assert!((field(&text, "fidelity") - 1.0).abs() < 1e-8);
}

#[test]
fn simulate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(boxcert(&["simulate", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, ideal_chsh_strategy().to_json().unwrap()).unwrap();
    let out = boxcert(&["simulate", path.to_str().unwrap(), "--swap", "cglmp"]);
    assert_eq!(out.status.code(), Some(2));
}
