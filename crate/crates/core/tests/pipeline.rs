mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use common::{dollars_per_mwh, fixture_case, fixture_config, micro_from_geo, oracle_schedule, rel_close};
use skybeam::economics::EconomicParams;
use skybeam::optimize::ModelOptions;
use skybeam::physics::AircraftParams;
use skybeam::pipeline::{load_inputs, prepare_altitude, run_choice, run_schedule};

const TOY_Z: f64 = 97.1567011693945;
const TOY_BASELINE_Z: f64 = 69.6101259841947;

fn summary(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn toy_schedule_matches_enumeration() {
    let case = fixture_case("toy", 12_100.0);
    let rate = dollars_per_mwh(&EconomicParams::default(), &AircraftParams::default());
    let m = micro_from_geo(&case);
    let z = oracle_schedule(&m, rate, &ModelOptions::default());
    assert!(rel_close(z, TOY_Z, 1e-6), "{z}");
    let mut zero = m.clone();
    zero.shifts = skybeam::coverage::ShiftSet::new(0, case.dt_s).unwrap();
    let zb = oracle_schedule(&zero, rate, &ModelOptions::default());
    assert!(rel_close(zb, TOY_BASELINE_Z, 1e-6), "{zb}");

    let dir = tempfile::tempdir().unwrap();
    run_schedule(&fixture_config("toy", dir.path())).unwrap();
    let s = summary(dir.path(), "toy_h12100_schedule_summary.json");
    assert!(rel_close(s["z_opt"].as_f64().unwrap(), TOY_Z, 1e-9));
    assert!(rel_close(s["z_baseline"].as_f64().unwrap(), TOY_BASELINE_Z, 1e-9));
    assert_eq!(s["shifted_flights"], 1);
}

#[test]
fn reruns_are_byte_identical_and_reuse_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config("toy", dir.path());
    run_schedule(&cfg).unwrap();
    run_choice(&cfg).unwrap();
    let first = snapshot(dir.path());

    let inputs = load_inputs(&cfg).unwrap();
    assert!(prepare_altitude(&cfg, &inputs, 12_100.0).unwrap().cache_hit);
    run_schedule(&cfg).unwrap();
    run_choice(&cfg).unwrap();
    assert_eq!(first, snapshot(dir.path()));

    fs::remove_dir_all(dir.path()).unwrap();
    run_schedule(&cfg).unwrap();
    run_choice(&cfg).unwrap();
    assert_eq!(first, snapshot(dir.path()));
}

#[test]
fn stale_cache_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config("toy", dir.path());
    let inputs = load_inputs(&cfg).unwrap();
    let first = prepare_altitude(&cfg, &inputs, 12_100.0).unwrap();
    assert!(!first.cache_hit);
    cfg.beam_params.wavelength_m = 0.04;
    let second = prepare_altitude(&cfg, &inputs, 12_100.0).unwrap();
    assert!(!second.cache_hit);
    assert_ne!(first.coverage, second.coverage);
    fs::write(&second.cache_path, b"garbage").unwrap();
    let third = prepare_altitude(&cfg, &inputs, 12_100.0).unwrap();
    assert!(!third.cache_hit);
    assert_eq!(third.coverage, second.coverage);
}

#[test]
fn toy_choice_surface() {
    let dir = tempfile::tempdir().unwrap();
    run_choice(&fixture_config("toy", dir.path())).unwrap();
    let text = fs::read_to_string(dir.path().join("toy_h12100_choice_surface.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 100);
    let s = summary(dir.path(), "toy_h12100_choice_summary.json");
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
}
