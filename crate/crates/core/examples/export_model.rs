//! Write the toy schedule MILP in LP and MPS form, then read an external
//! solver's values file back as a validated plan.

use std::fs;
use std::path::Path;

use skybeam::config::RunConfig;
use skybeam::optimize::{
    build_schedule_model, export_model, import_solution, solve_schedule, write_values, Backend, ModelFormat,
    ModelOptions,
};
use skybeam::pipeline::{load_inputs, prepare_altitude};

fn main() -> skybeam::Result<()> {
    let out = std::env::temp_dir().join("skybeam-export-example");
    let mut cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/config.json"))?;
    cfg.out_dir = out.clone();
    let inputs = load_inputs(&cfg)?;
    let data = prepare_altitude(&cfg, &inputs, 12_100.0)?;
    let net = data.network(&cfg, &inputs, true)?;
    let opts = ModelOptions::default();
    let built = build_schedule_model(&net, &opts)?;
    println!(
        "{} variables ({} binary), {} constraints",
        built.model.vars.len(),
        built.model.num_binaries(),
        built.model.constraints.len()
    );
    for (format, name) in [(ModelFormat::Lp, "toy.lp"), (ModelFormat::Mps, "toy.mps")] {
        export_model(&built.model, &out.join(name), format)?;
        println!("wrote {}", out.join(name).display());
    }

    // Stand-in for an external solver: our own plan written as name/value lines.
    let plan = solve_schedule(&net, &Backend::Exact(cfg.exact), &opts)?;
    let values = out.join("toy.sol");
    fs::write(&values, write_values(&built.model, &built.encode(&plan))).map_err(|e| skybeam::Error::io(&values, e))?;
    let back = import_solution(&built, &net, &values)?;
    println!("imported plan: ${:.2} ({:?})", back.objective, back.status);
    Ok(())
}
