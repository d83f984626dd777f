//! Departure-shift optimization on the toy fixture: exact branch-and-bound
//! against the greedy heuristic and the zero-shift baseline.

use std::path::Path;

use skybeam::config::RunConfig;
use skybeam::optimize::{build_schedule_model, relaxation_bound, solve_schedule, Backend, ModelOptions};
use skybeam::pipeline::{load_inputs, prepare_altitude};

fn main() -> skybeam::Result<()> {
    let mut cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/config.json"))?;
    cfg.out_dir = std::env::temp_dir().join("skybeam-schedule-example");
    let inputs = load_inputs(&cfg)?;
    let data = prepare_altitude(&cfg, &inputs, 12_100.0)?;
    let net = data.network(&cfg, &inputs, true)?;
    let opts = ModelOptions::default();

    let exact = solve_schedule(&net, &Backend::Exact(cfg.exact), &opts)?;
    let greedy = solve_schedule(&net, &Backend::Greedy, &opts)?;
    let baseline = solve_schedule(&net.zero_shift_baseline()?, &Backend::Exact(cfg.exact), &opts)?;
    let bound = relaxation_bound(&build_schedule_model(&net, &opts)?)?;

    println!("baseline  ${:>8.2}", baseline.objective);
    println!("greedy    ${:>8.2}", greedy.objective);
    println!("exact     ${:>8.2}  ({:?})", exact.objective, exact.status);
    println!("LP bound  ${bound:>8.2}");
    for (id, s) in net.flight_ids.iter().zip(&exact.shifts_chosen) {
        println!("  {id}: depart {:+} min", *s as i64 * net.dt_s() / 60);
    }
    println!(
        "{:.3} MWh over {} beaming minutes; fuel ${:.2} + CO2 ${:.2}",
        exact.savings.energy_mwh, exact.savings.duration_min, exact.savings.fuel_saving, exact.savings.co2_saving
    );
    Ok(())
}
