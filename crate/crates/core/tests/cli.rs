use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nv_cavity::config::ExperimentConfig;
use nv_cavity::pipeline::{cmd_fixtures, WHITE_NOISE_SIGMA};
use serde_json::Value;

fn nvcav(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvcav"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn nvcav")
}

fn ok(out: &Path, args: &[&str]) {
    let o = nvcav(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
        .unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        ok(dir, &["cavity-scan", "--trace", "birefringent", "--points", "2001"]);
        ok(dir, &["saturation"]);
        ok(dir, &["lockin-sim", "--duration-s", "0.05", "--noise-sigma", "0.01"]);
        ok(dir, &["fixtures"]);
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10, "{names:?}");
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs between runs");
    }
}

#[test]
fn bundled_fixtures_match_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    let written = cmd_fixtures(&ExperimentConfig::paper_defaults(), dir.path()).unwrap();
    for path in written {
        let name = path.file_name().unwrap().to_str().unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(data(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_changes_noisy_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(a.path(), &["fixtures"]);
    ok(b.path(), &["--seed", "2", "fixtures"]);
    let x = std::fs::read(a.path().join("saturation_synthetic.csv")).unwrap();
    let y = std::fs::read(b.path().join("saturation_synthetic.csv")).unwrap();
    assert_ne!(x, y);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(nvcav(d, &["sensitivity"]).status.code(), Some(0));

    let bad = d.join("bad.csv");
    std::fs::write(&bad, "pump_power_W,transmission\n0,1\n1,0.5\n").unwrap();
    let o = nvcav(d, &["saturation", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalized_transmission"));

    assert_eq!(nvcav(d, &["--config", "no-such-config.json", "sensitivity"]).status.code(), Some(2));
    assert_eq!(nvcav(d, &["odmr", "--start-hz", "3e9", "--stop-hz", "2e9"]).status.code(), Some(2));
    assert_eq!(nvcav(d, &["no-such-command"]).status.code(), Some(2));

    let cfg = d.join("broken.json");
    std::fs::write(&cfg, "{\"schema_version\": 1, \"unknown_section\": {}}").unwrap();
    assert_eq!(nvcav(d, &["--config", cfg.to_str().unwrap(), "sensitivity"]).status.code(), Some(2));

    // Parseable but with too few points to fit two parameters: numerical failure.
    let short = d.join("short.csv");
    std::fs::write(&short, "pump_power_W,normalized_transmission\n0.5,0.8\n").unwrap();
    let o = nvcav(d, &["saturation", "--input", short.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn show_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = nvcav(dir.path(), &["show-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let parsed = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(parsed, ExperimentConfig::paper_defaults());

    let path = dir.path().join("mine.json");
    std::fs::write(&path, &text).unwrap();
    let again = nvcav(dir.path(), &["--config", path.to_str().unwrap(), "show-config"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn config_dir_lookup_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::paper_defaults();
    cfg.detection.detected_power_W = 0.23;
    std::fs::write(dir.path().join("strong.json"), cfg.to_json().unwrap()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nvcav"))
        .args(["--out", dir.path().to_str().unwrap(), "--config", "strong", "sensitivity"])
        .env("NVCAV_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sn = json(dir.path().join("sensitivity.json"))["shot_noise_T_per_rtHz"].as_f64().unwrap();
    assert!((6.7e-12..=7.4e-12).contains(&sn), "{sn}");
}

#[test]
fn sensitivity_report_values() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sensitivity"]);
    let r = json(dir.path().join("sensitivity.json"));
    let get = |k: &str| r[k].as_f64().unwrap();
    assert!((67e-12..=74e-12).contains(&get("shot_noise_T_per_rtHz")));
    assert!((225e-15..=275e-15).contains(&get("projection_noise_T_per_rtHz")));
    assert!((0.21..=0.23).contains(&get("temperature_K_per_uT")));
    assert_eq!(get("bandwidth_Hz"), 13.5e3);
}

#[test]
fn odmr_dips_sit_at_the_bias_field_splitting() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["odmr"]);
    let r = json(dir.path().join("odmr_report.json"));
    let centers: Vec<f64> = r["fitted_centers_Hz"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(centers.len(), 2);
    let half = 0.5 * (centers[1] - centers[0]);
    assert!((half - 48.4e6).abs() < 0.25e6, "half splitting {half}");
    assert!((0.5 * (centers[0] + centers[1]) - 2.87e9).abs() < 1e5);
    let spectrum = nv_cavity::io::read_odmr(&dir.path().join("odmr.csv")).unwrap();
    assert_eq!(spectrum.microwave_frequencies.len(), 2001);
    assert!(spectrum.normalized_transmission.iter().all(|v| *v > 0.0 && *v <= 1.0));
}

#[test]
fn psd_of_fixture_recovers_white_level() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--plot", "psd", "--input", data("white_noise.csv").to_str().unwrap()]);
    let r = json(dir.path().join("noise_floor.json"));
    let floor = r["noise_floor"].as_f64().unwrap();
    let expected = WHITE_NOISE_SIGMA * (2.0 / 10e3f64).sqrt();
    assert!((floor / expected - 1.0).abs() < 0.10, "{floor} vs {expected}");
    assert!(dir.path().join("spectrum.svg").is_file());
}

#[test]
fn saturation_fit_of_fixture() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["saturation", "--input", data("saturation_synthetic.csv").to_str().unwrap()]);
    let r = json(dir.path().join("saturation_fit.json"));
    let a0 = r["A0"].as_f64().unwrap();
    let psat = r["Psat_W"].as_f64().unwrap();
    assert!((a0 / 0.022 - 1.0).abs() < 0.05, "A0 {a0}");
    assert!((psat / 0.88 - 1.0).abs() < 0.05, "Psat {psat}");
    assert!(r["converged"].as_bool().unwrap());
    assert!(r["uncertainty_note"].as_str().unwrap().contains("statistical"));
}

#[test]
fn json_format_writes_tables_as_json() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--format", "json", "cavity-scan", "--trace", "empty", "--points", "101"]);
    let t = json(dir.path().join("cavity_scan_empty.json"));
    assert_eq!(t["frequency_Hz"].as_array().unwrap().len(), 101);
    assert!(!dir.path().join("cavity_scan_empty.csv").exists());
    let report = json(dir.path().join("cavity_scan_empty_report.json"));
    assert!(report.is_object());
}
