mod common;

use std::fs;
use std::path::Path;

use common::{dollars_per_mwh, fixture_config, rel_close, rng};
use rand::Rng;
use skybeam::economics::EconomicParams;
use skybeam::optimize::{export_model, solve_schedule, write_values, Backend, ExactOptions, ModelFormat, Solution};
use skybeam::pipeline::{load_inputs, prepare_altitude, run_report, run_schedule, ProblemChoice};
use skybeam::report::{grand_total, read_rows_csv, rows_csv, Dimension};
use skybeam::Error;

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn demo_cuts_sum_to_plan_totals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config("demo", dir.path());
    run_schedule(&cfg).unwrap();
    for h in [9100, 12100, 15100] {
        let prefix = format!("demo_h{h}_schedule");
        let s = json(&dir.path().join(format!("{prefix}_summary.json")));
        let energy = s["savings"]["energy_mwh"].as_f64().unwrap();
        let total = s["savings"]["total"].as_f64().unwrap();
        let minutes = s["savings"]["duration_min"].as_f64().unwrap();
        assert!(total > 0.0);
        for dim in Dimension::ALL {
            let text = fs::read_to_string(dir.path().join(format!("{prefix}_{}.csv", dim.name()))).unwrap();
            let rows = read_rows_csv(&text).unwrap();
            let g = grand_total(&rows);
            assert!(rel_close(g.energy_mwh, energy, 1e-9), "{h} {dim:?}");
            assert!(rel_close(g.total, total, 1e-9), "{h} {dim:?}");
            assert!(rel_close(g.duration_min, minutes, 1e-9), "{h} {dim:?}");
            for r in &rows {
                assert!(rel_close(r.savings.fuel_saving + r.savings.co2_saving, r.savings.total, 1e-12));
            }
            if dim == Dimension::DayNight {
                assert!(rows.iter().all(|r| r.key == "day" || r.key == "night"));
            }
        }
    }
}

#[test]
fn random_prices_partition_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config("toy", dir.path());
    let inputs = load_inputs(&cfg).unwrap();
    let data = prepare_altitude(&cfg, &inputs, 12_100.0).unwrap();
    let mut r = rng(41);
    for _ in 0..20 {
        let e = EconomicParams {
            fuel_price: r.gen_range(0.2..3.0),
            fuel_emission: r.gen_range(2.0..4.0),
            elec_price: r.gen_range(0.0..150.0),
            solar_emission: r.gen_range(0.0..80.0),
            carbon_price: r.gen_range(0.0..0.5),
        };
        cfg.economic_params = e;
        let net = data.network(&cfg, &inputs, true).unwrap();
        let sol = solve_schedule(&net, &Backend::Exact(ExactOptions::default()), &cfg.model_options()).unwrap();
        let per_mwh = dollars_per_mwh(&e, &cfg.aircraft_params);
        assert!(rel_close(sol.savings.total, sol.savings.energy_mwh * per_mwh, 1e-9));
        assert!(rel_close(sol.savings.fuel_saving + sol.savings.co2_saving, sol.savings.total, 1e-12));
        let ctx = data.report_context(&cfg, &inputs);
        for dim in Dimension::ALL {
            let g = grand_total(&ctx.aggregate(&sol, dim).rows);
            assert!(rel_close(g.total, sol.savings.total, 1e-9));
            assert!(rel_close(g.energy_mwh, sol.savings.energy_mwh, 1e-9));
            assert!(rel_close(g.co2_kg_avoided, sol.savings.co2_kg_avoided, 1e-9));
        }
        let split = ctx.day_night_split(&sol);
        let e_sum: f64 = split.iter().map(|d| d.day_mwh + d.night_mwh).sum();
        assert!(rel_close(e_sum, sol.savings.energy_mwh, 1e-9));
    }
}

#[test]
fn rows_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config("toy", dir.path());
    run_schedule(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("toy_h12100_schedule_flight.csv")).unwrap();
    let rows = read_rows_csv(&text).unwrap();
    assert_eq!(rows_csv(&rows, &cfg.config_hash()), text);
    assert!(read_rows_csv("key,total\nA,1\n").is_err());
}

#[test]
fn geojson_layers_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config("toy", dir.path());
    run_schedule(&cfg).unwrap();
    let hash = cfg.config_hash();
    let farms = json(&dir.path().join("toy_h12100_schedule_farms.geojson"));
    assert_eq!(farms["type"], "FeatureCollection");
    assert_eq!(farms["config_hash"], hash.as_str());
    let feats = farms["features"].as_array().unwrap();
    assert_eq!(feats.len(), 2);
    assert_eq!(feats[0]["geometry"]["coordinates"][0].as_f64().unwrap(), -97.345);
    let flights = json(&dir.path().join("toy_h12100_schedule_flights.geojson"));
    for f in flights["features"].as_array().unwrap() {
        assert_eq!(f["geometry"]["type"], "LineString");
        let c = f["geometry"]["coordinates"].as_array().unwrap();
        assert_eq!(c.len(), 33);
        assert_eq!(f["properties"]["range_class"], "short");
    }
}

#[test]
fn saved_and_external_plans_report_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config("toy", dir.path());
    run_schedule(&cfg).unwrap();
    let saved = dir.path().join("toy_h12100_schedule_solution.json");
    run_report(&cfg, &saved, ProblemChoice::Schedule).unwrap();
    let from_json = fs::read_to_string(dir.path().join("toy_h12100_report_farm.csv")).unwrap();
    assert_eq!(from_json, fs::read_to_string(dir.path().join("toy_h12100_schedule_farm.csv")).unwrap());

    let sol: Solution = serde_json::from_str(&fs::read_to_string(&saved).unwrap()).unwrap();
    let inputs = load_inputs(&cfg).unwrap();
    let data = prepare_altitude(&cfg, &inputs, 12_100.0).unwrap();
    let net = data.network(&cfg, &inputs, true).unwrap();
    let built = skybeam::optimize::build_schedule_model(&net, &cfg.model_options()).unwrap();
    export_model(&built.model, &dir.path().join("m.lp"), ModelFormat::Lp).unwrap();
    let values = dir.path().join("values.sol");
    fs::write(&values, write_values(&built.model, &built.encode(&sol))).unwrap();
    run_report(&cfg, &values, ProblemChoice::Schedule).unwrap();
    let summary = json(&dir.path().join("toy_h12100_report_summary.json"));
    assert!(rel_close(summary["objective"].as_f64().unwrap(), sol.objective, 1e-9));
    assert_eq!(summary["status"]["status"], "external");

    let mut tampered = sol.clone();
    tampered.allocations[0].power_mw *= 10.0;
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_string(&tampered).unwrap()).unwrap();
    assert!(matches!(run_report(&cfg, &bad, ProblemChoice::Schedule), Err(Error::Rejected(_))));
}
