//! Equipment choice across a grid of farm and flight penetration rates.

use std::path::Path;

use skybeam::config::RunConfig;
use skybeam::optimize::{penetration_grid, penetration_sweep, Backend, ModelOptions};
use skybeam::pipeline::{load_inputs, prepare_altitude};

fn main() -> skybeam::Result<()> {
    let mut cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/config.json"))?;
    cfg.out_dir = std::env::temp_dir().join("skybeam-choice-example");
    let inputs = load_inputs(&cfg)?;
    let data = prepare_altitude(&cfg, &inputs, 12_100.0)?;
    let net = data.network(&cfg, &inputs, false)?;

    let rates = [0.0, 0.25, 0.5, 0.75, 1.0];
    let sweep = penetration_sweep(&net, &penetration_grid(&rates, &rates), &Backend::Exact(cfg.exact), &ModelOptions::default());

    print!("rho_farm \\ rho_flight");
    for r in rates {
        print!("{r:>9.2}");
    }
    println!();
    for row in sweep.scenarios.chunks(rates.len()) {
        print!("{:>21.2}", row[0].penetration.rho_farm);
        for s in row {
            match &s.result {
                Ok(sol) => print!("{:>9.2}", sol.objective),
                Err(_) => print!("{:>9}", "err"),
            }
        }
        println!();
    }
    println!("farm selection counts: {:?}", sweep.farm_frequency);
    Ok(())
}
