use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn diffext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffext")).args(args).env("DIFFEXT_WORKERS", "1").output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diffext-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs a check with `--out` and compares the report with its golden file.
/// `DIFFEXT_BLESS=1` rewrites the golden file instead.
fn check_golden(name: &str, args: &[&str]) {
    let out = scratch(name);
    let mut full = vec!["verify"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let o = diffext(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(&out).unwrap();
    if std::env::var_os("DIFFEXT_BLESS").is_some() {
        std::fs::write(golden(name), &got).unwrap();
    }
    let want = std::fs::read_to_string(golden(name)).expect("golden file present");
    assert_eq!(got, want, "{name} differs from its golden report");
}

#[test]
fn golden_delta() {
    check_golden("delta.json", &["delta", "--kmax", "50"]);
}

#[test]
fn golden_temporal() {
    check_golden("temporal.json", &["temporal", "--N", "2", "--deg", "1", "--freq", "1", "--D", "3", "--W", "3"]);
}

#[test]
fn golden_hamiltonian() {
    check_golden("hamiltonian.json", &["hamiltonian", "--N", "2", "--c", "1/2", "--h", "1/3", "--D", "3", "--W", "3"]);
}

#[test]
fn golden_currents() {
    check_golden("currents.json", &["currents", "--N", "2", "--c", "1/2", "--k0", "2", "--k1", "3", "--k2", "-1", "--window", "2"]);
}

#[test]
fn golden_jet() {
    check_golden("jet.json", &["jet", "--N", "2", "--deg", "1", "--freq", "1", "--trials", "3", "--seed", "4"]);
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "jet", "--N", "2", "--deg", "1", "--freq", "1", "--trials", "2"];
    let a = diffext(&args);
    let b = diffext(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("PASS jet"));
}

#[test]
fn config_file_supplies_settings() {
    let cfg = scratch("delta.toml");
    std::fs::write(&cfg, "kmax = 5\n").unwrap();
    let o = diffext(&["verify", "delta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("kmax=5"));
    let o = diffext(&["verify", "delta", "--config", cfg.to_str().unwrap(), "--kmax", "7"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("kmax=7"));
}

#[test]
fn unknown_config_key_is_a_configuration_error() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "kmax = 5\nbogus = 1\n").unwrap();
    let o = diffext(&["verify", "delta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_scalar_is_a_configuration_error() {
    let o = diffext(&["verify", "currents", "--c", "1/0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = diffext(&["verify", "gauge", "--gauge", "u1:1", "--level", "5", "--g", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_with_one() {
    let o = diffext(&["verify", "gauge", "--N", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL gauge"));
}
