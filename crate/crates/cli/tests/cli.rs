use std::fs;
use std::path::Path;
use std::process::Command;

use radial_conformal::conformal::{write_bundle_csv, ConformalSolution};
use radial_conformal::radial::{build_grid, Dimension, RadialProfile};
use serde_json::Value;

fn radconf(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_radconf"))
        .args(args)
        .output()
        .expect("run radconf");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 stdout");
    let json = serde_json::from_str(stdout.trim())
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {stdout}\nstderr: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().expect("exit code"), json)
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter()
        .fold(v, |v, k| &v[*k])
        .as_f64()
        .unwrap_or_else(|| panic!("{path:?} is not a number in {v}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn schwarzschild_n3_report() {
    let (code, v) = radconf(&["smooth-schwarzschild", "--n", "3", "--m", "1"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["scenario"], "smooth-schwarzschild");
    assert!((num(&v, &["mass", "standard"]) + 1.0).abs() < 0.01);
    assert!((num(&v, &["decay", "tau"]) - 1.5).abs() < 0.05);
    assert_eq!(v["checks"]["monotone"], true);
    assert_eq!(v["checks"]["passed"], true);
    assert_eq!(v["passed"], true);
}

#[test]
fn schwarzschild_zero_mass_is_invalid() {
    let (code, v) = radconf(&["smooth-schwarzschild", "--n", "3", "--m", "0"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "invalid-argument");
    assert_eq!(v["passed"], false);
}

#[test]
fn schwarzschild_n4_tau_exponent() {
    let (code, v) = radconf(&["smooth-schwarzschild", "--n", "4", "--m", "1"]);
    assert_eq!(code, 0, "{v}");
    assert!((num(&v, &["decay", "tau"]) - 2.0).abs() < 0.05);
    assert!((num(&v, &["mass", "standard"]) + 1.0).abs() < 0.01);
}

#[test]
fn free_tau_classifications() {
    let (code, v) = radconf(&["free-tau", "--n", "3", "--c", "1", "--q", "1.5"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["classification"], "negative");
    let m = num(&v, &["mass", "standard"]);
    assert!((m / (-2.0 / 9.0) - 1.0).abs() < 0.02, "{m}");
    assert!(v["iterations"].as_u64().unwrap() > 0);
    assert_eq!(v["solver"]["converged"], true);

    let (_, v) = radconf(&["free-tau", "--n", "3", "--c", "1", "--q", "2"]);
    assert_eq!(v["classification"], "zero");
    assert!(num(&v, &["mass", "standard"]).abs() < 1e-2);

    let (_, v) = radconf(&["free-tau", "--n", "3", "--c", "1", "--q", "1.3"]);
    assert_eq!(v["classification"], "negative-infinite");
    assert!(v["mass"]["standard"].is_null());
    assert_eq!(v["mass"]["diverges"], true);
}

#[test]
fn free_tau_rejects_q_outside_interval() {
    let (code, v) = radconf(&["free-tau", "--c", "1", "--q", "1.2"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "invalid-argument");
}

#[test]
fn verify_round_trip_reproduces_pass_record() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let json = dir.path().join("s.json");
    let (code, _) = radconf(&[
        "smooth-schwarzschild",
        "--m",
        "1",
        "--profiles",
        path_str(&csv),
    ]);
    assert_eq!(code, 0);
    let (built_code, built) = radconf(&["smooth-schwarzschild", "--m", "1"]);
    let status = Command::new(env!("CARGO_BIN_EXE_radconf"))
        .args(["verify", "--profiles", path_str(&csv), "--out", path_str(&json)])
        .status()
        .unwrap();
    let verified: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(status.code(), Some(built_code));
    assert_eq!(verified["passed"], built["passed"]);
    assert_eq!(verified["checks"]["passed"], built["checks"]["passed"]);
    assert_eq!(verified["checks"]["monotone"], built["checks"]["monotone"]);
    // the reloaded grid map is recovered from the nodes, so values agree to roundoff
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 + 1e-6 * a.abs().max(b.abs());
    for key in ["identity_residual", "lw_identity", "divW_identity", "lichnerowicz_residual"] {
        let (a, b) = (num(&verified, &["checks", key]), num(&built, &["checks", key]));
        assert!(close(a, b), "{key}: {a:e} vs {b:e}");
    }
    for key in ["hamiltonian_sup", "momentum_sup", "hamiltonian_relative", "momentum_relative"] {
        let (a, b) = (num(&verified, &["residuals", key]), num(&built, &["residuals", key]));
        assert!(close(a, b), "{key}: {a:e} vs {b:e}");
    }
}

#[test]
fn mass_and_decay_read_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    radconf(&["smooth-schwarzschild", "--m", "1", "--profiles", path_str(&csv)]);
    let (code, v) = radconf(&["mass", "--profiles", path_str(&csv)]);
    assert_eq!(code, 0, "{v}");
    assert!((num(&v, &["mass", "standard"]) + 1.0).abs() < 0.01);
    let (code, v) = radconf(&["decay", "--profiles", path_str(&csv)]);
    assert_eq!(code, 0, "{v}");
    assert!((num(&v, &["decay", "tau"]) - 1.5).abs() < 0.05);
}

#[test]
fn truncated_csv_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    radconf(&["smooth-schwarzschild", "--m", "1", "--profiles", path_str(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    let cut = text.len() / 2;
    let cut = text[..cut].rfind(',').unwrap();
    fs::write(&csv, &text[..cut]).unwrap();
    let (code, v) = radconf(&["verify", "--profiles", path_str(&csv)]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse-error");
    assert!(v["error"]["message"].as_str().unwrap().contains("line"));
}

#[test]
fn missing_column_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    fs::write(&csv, "r,phi,tau\n0,1,0\n1,1,0\n").unwrap();
    let (code, v) = radconf(&["verify", "--profiles", path_str(&csv)]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "schema-error");
}

#[test]
fn flat_bundle_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let grid = build_grid(400, 100.0, 1.01).unwrap();
    let dim = Dimension::new(3).unwrap();
    let sol = ConformalSolution::from_phi(dim, RadialProfile::constant(&grid, 1.0)).unwrap();
    write_bundle_csv(&sol, fs::File::create(&csv).unwrap()).unwrap();
    let (code, v) = radconf(&["verify", "--profiles", path_str(&csv)]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(num(&v, &["residuals", "hamiltonian_sup"]), 0.0);
    assert_eq!(num(&v, &["residuals", "momentum_sup"]), 0.0);
    assert_eq!(v["checks"]["passed"], true);
}

#[test]
fn identical_config_gives_identical_json() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_radconf"))
            .args(["free-tau", "--c", "1", "--q", "1.5", "--grid-points", "1500", "--grid-max", "1000"])
            .output()
            .unwrap()
            .stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}
