//! Cut an optimized plan by state, range class, day/night, farm and flight.

use std::path::Path;

use skybeam::config::RunConfig;
use skybeam::optimize::{solve_schedule, Backend};
use skybeam::pipeline::{load_inputs, prepare_altitude};
use skybeam::report::Dimension;

fn main() -> skybeam::Result<()> {
    let mut cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo/config.json"))?;
    cfg.out_dir = std::env::temp_dir().join("skybeam-report-example");
    let inputs = load_inputs(&cfg)?;
    let data = prepare_altitude(&cfg, &inputs, 12_100.0)?;
    let net = data.network(&cfg, &inputs, true)?;
    let plan = solve_schedule(&net, &Backend::Exact(cfg.exact), &cfg.model_options())?;
    let ctx = data.report_context(&cfg, &inputs);

    println!("plan total ${:.2}, {:.3} MWh", plan.savings.total, plan.savings.energy_mwh);
    for dim in Dimension::ALL {
        let agg = ctx.aggregate(&plan, dim);
        println!("{}:", dim.name());
        for row in agg.rows.iter().take(4) {
            println!("  {:<12} ${:>9.2}  {:>7.3} MWh", row.key, row.savings.total, row.savings.energy_mwh);
        }
        if agg.rows.len() > 4 {
            println!("  ... {} more", agg.rows.len() - 4);
        }
    }
    Ok(())
}
