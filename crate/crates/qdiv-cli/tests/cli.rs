use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qdiv::{io, linalg, paperlab};
use serde_json::Value;
use tempfile::TempDir;

fn qdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiv")).args(args).env_remove("QDIV_SEED").output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn div_commuting_states_matches_classical() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.json", &io::matrix_to_json(&linalg::real_diag(&[0.7, 0.3])));
    let q = write(&dir, "s.json", &io::matrix_to_json(&linalg::real_diag(&[0.4, 0.6])));
    let o = qdiv(&["div", "--rho", s(&r), "--sigma", s(&q), "--f", "eta", "--alpha", "2", "--z", "1"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    let kl = 0.7 * (0.7f64 / 0.4).ln() + 0.3 * (0.3f64 / 0.6).ln();
    let d2 = (0.49 / 0.4 + 0.09 / 0.6f64).ln();
    assert!((v["S_f"].as_f64().unwrap() - kl).abs() < 1e-12);
    assert!((v["S_hat_f"].as_f64().unwrap() - kl).abs() < 1e-12);
    for key in ["D_alpha", "D_star_alpha", "D_alpha_z"] {
        assert!((v[key].as_f64().unwrap() - d2).abs() < 1e-12, "{key}");
    }
    assert!((v["D_max"].as_f64().unwrap() - (0.7f64 / 0.4).ln()).abs() < 1e-12);
}

#[test]
fn div_reports_infinity_as_string() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.json", &io::matrix_to_json(&linalg::real_diag(&[0.5, 0.5])));
    let q = write(&dir, "s.json", &io::matrix_to_json(&linalg::real_diag(&[1.0, 0.0])));
    let o = qdiv(&["div", "--rho", s(&r), "--sigma", s(&q)]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["S_f"], "inf");
}

#[test]
fn check_pinched_pure_example() {
    let (phi, rho, sigma) = paperlab::pinched_pure_data().unwrap();
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", &io::channel_to_json(&phi).unwrap());
    let r = write(&dir, "r.json", &io::matrix_to_json(rho.matrix()));
    let q = write(&dir, "s.json", &io::matrix_to_json(sigma.matrix()));
    let o = qdiv(&["check", "--channel", s(&c), "--rho", s(&r), "--sigma", s(&q)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["summary"], "maximal: preserved; standard: NOT preserved");
}

#[test]
fn recover_identity_channel() {
    let dir = TempDir::new().unwrap();
    let id = io::channel_to_json(&qdiv::channels::QuantumChannel::new(vec![linalg::identity(2)]).unwrap()).unwrap();
    let c = write(&dir, "c.json", &id);
    let r = write(&dir, "r.json", &io::matrix_to_json(&linalg::real_diag(&[0.7, 0.3])));
    let q = write(&dir, "s.json", &io::matrix_to_json(&linalg::real_diag(&[0.4, 0.6])));
    let o = qdiv(&["recover", "--channel", s(&c), "--sigma", s(&q), "--rho", s(&r)]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert!(v["rho_residual"].as_f64().unwrap() < 1e-12);
    assert!(io::parse_channel(&v["recovery"].to_string()).is_ok());
}

#[test]
fn measured_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let r = write(&dir, "r.json", &io::matrix_to_json(&linalg::real_diag(&[0.9, 0.1])));
    let q = write(&dir, "s.json", r#"{"dim":2,"entries":[[[0.5,0],[0.4,0]],[[0.4,0],[0.5,0]]]}"#);
    let run = || stdout_json(&qdiv(&["--seed", "7", "measured", "--rho", s(&r), "--sigma", s(&q), "--alpha", "2"]));
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert!(a["stationarity"].as_f64().unwrap() < 1e-6);
}

#[test]
fn repro_all_passes() {
    let o = qdiv(&["repro", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["reports"].as_array().unwrap().len(), 6);
    assert_eq!(v["pass"], true);
}

#[test]
fn scan_az_small_grid() {
    let o = qdiv(&["scan-az", "--alpha-grid", "0.5,2", "--z-grid", "1,2", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"dim\": 2,");
    let good = write(&dir, "g.json", &io::matrix_to_json(&linalg::real_diag(&[0.5, 0.5])));
    let o = qdiv(&["div", "--rho", s(&bad), "--sigma", s(&good)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    let neg = write(&dir, "n.json", &io::matrix_to_json(&linalg::real_diag(&[1.5, -0.5])));
    assert_eq!(qdiv(&["div", "--rho", s(&neg), "--sigma", s(&good)]).status.code(), Some(2));
    assert_eq!(qdiv(&["repro", "nope"]).status.code(), Some(2));
    assert_eq!(qdiv(&["div", "--rho", s(&good)]).status.code(), Some(2));
    assert_eq!(qdiv(&["div", "--rho", s(&good), "--sigma", s(&good), "--f", "bogus"]).status.code(), Some(2));
}
