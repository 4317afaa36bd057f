//! End-to-end behaviour of the `unitheta` binary: exit codes, manifests,
//! cache handling and environment overrides.

use std::path::Path;
use std::process::{Command, Output};

use unitheta_cli::manifest::Envelope;

fn unitheta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitheta"))
        .args(args)
        .env_remove("UNITHETA_PREC")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn envelope(out: &Output) -> Envelope {
    serde_json::from_slice(&out.stdout).expect("JSON envelope")
}

#[test]
fn exit_codes() {
    assert_eq!(unitheta(&["--no-cache", "verify", "identities", "--order", "30"]).status.code(), Some(0));
    // A check that cannot pass at this truncation exits 1, not 2.
    let fail = unitheta(&["--no-cache", "verify", "theorem", "--points", "i/2", "--k-max", "16"]);
    assert_eq!(fail.status.code(), Some(1));
    assert_eq!(unitheta(&["--no-cache", "eval", "F", "--z", "0.3"]).status.code(), Some(2));
    assert_eq!(unitheta(&["--no-cache", "series", "f", "--order", "0"]).status.code(), Some(2));
    assert_eq!(unitheta(&["--no-cache", "series", "nonesuch"]).status.code(), Some(2));
}

#[test]
fn manifest_digest_is_recomputable() {
    let out = unitheta(&["--no-cache", "eval", "F", "--z", "2i", "--k-max", "8", "--json"]);
    assert!(out.status.success());
    let env = envelope(&out);
    assert!(env.manifest.verify(&env.result));
    assert_eq!(env.manifest.command, "eval");
    assert!(env.manifest.wall_time_ms.is_none());
    let timed = envelope(&unitheta(&["--no-cache", "--timing", "series", "f", "--json"]));
    assert!(timed.manifest.wall_time_ms.is_some());
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_unitheta"))
        .args(["--no-cache", "kloosterman", "7", "2", "--json"])
        .env("UNITHETA_PREC", "96")
        .output()
        .unwrap();
    assert_eq!(envelope(&out).manifest.precision_bits, 96);
}

fn cache_files(dir: &Path) -> Vec<std::path::PathBuf> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect()
}

#[test]
fn cache_cold_warm_corrupt_clear() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["--cache", cache, "coeff", "alpha_tilde", "--n-range", "1..3", "--k-max", "16", "--json"];
    let cold = unitheta(&args);
    assert!(cold.status.success());
    assert_eq!(cache_files(dir.path()).len(), 3);
    let warm = unitheta(&args);
    assert_eq!(cold.stdout, warm.stdout);

    std::fs::write(&cache_files(dir.path())[0], b"{ truncated").unwrap();
    let repaired = unitheta(&args);
    assert_eq!(repaired.stdout, cold.stdout);
    assert!(String::from_utf8_lossy(&repaired.stderr).contains("corrupted"));

    let shown = envelope(&unitheta(&["--cache", cache, "cache", "show", "--json"]));
    assert_eq!(shown.result["entries"].as_array().unwrap().len(), 3);
    let cleared = envelope(&unitheta(&["--cache", cache, "cache", "clear", "--json"]));
    assert_eq!(cleared.result["removed"], 3);
    assert!(cache_files(dir.path()).is_empty());
}

#[test]
fn theorem_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"["3i", "-3i"]"#).unwrap();
    let out = unitheta(&["--no-cache", "verify", "theorem", "--grid", grid.to_str().unwrap(), "--k-max", "16", "--csv"]);
    // Far below the axis K = 16 is not yet converged; only the layout matters here.
    assert_ne!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with("# manifest"));
    assert_eq!(lines.next(), Some("# unitheta theorem v1"));
    assert_eq!(lines.next(), Some("z,half_plane,rel_err,K_used,stabilized"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",upper,") && rows[1].contains(",lower,"));
}
