//! Sparse coverage for the demo fixture at one altitude: which farm sees
//! which flight at which step, for every admissible departure shift.

use std::path::Path;

use skybeam::config::RunConfig;
use skybeam::pipeline::{load_inputs, prepare_altitude};

fn main() -> skybeam::Result<()> {
    let mut cfg = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo/config.json"))?;
    cfg.out_dir = std::env::temp_dir().join("skybeam-coverage-example");
    let inputs = load_inputs(&cfg)?;
    let data = prepare_altitude(&cfg, &inputs, 12_100.0)?;
    let cov = &data.coverage;
    println!(
        "{} farms x {} flights x {} steps x {} shifts -> {} entries{}",
        cov.n_farms,
        cov.n_flights,
        cov.grid.n_steps,
        cov.shift_values().len(),
        cov.entries.len(),
        if data.cache_hit { " (cached)" } else { "" }
    );
    let unshifted = cov.without_shifts();
    for (i, tr) in data.trajectories.iter().enumerate() {
        let seen: Vec<_> = unshifted.entries.iter().filter(|e| e.flight as usize == i).collect();
        if seen.is_empty() {
            continue;
        }
        let best = seen.iter().map(|e| e.coef).fold(0.0, f64::max);
        println!("  {:<4} {:>3} links, best coefficient {:.4}", tr.flight_id, seen.len(), best);
    }
    println!("cache: {}", data.cache_path.display());
    Ok(())
}
