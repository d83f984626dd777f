//! Which farms of the demo file can beam 1 MW to an aircraft at each
//! cruise altitude, and how far their beams reach.

use std::path::Path;

use skybeam::ingest::{load_farms, FarmColumns};
use skybeam::physics::{end_to_end_efficiency, min_qualifying_capacity, qualify_farms, BeamParams};

fn main() -> skybeam::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo/farms.csv");
    let (farms, report) = load_farms(&path, &FarmColumns::default())?;
    let params = BeamParams::default();
    println!("{} farms loaded ({} rejected), eta_sys = {:.4}", farms.len(), report.rejected(), end_to_end_efficiency(&params));

    for h in [9_100.0, 12_100.0, 15_100.0] {
        let q = qualify_farms(&farms, &params, h);
        println!(
            "h = {h:>6} m: threshold {:.2} MW, {} qualified",
            min_qualifying_capacity(&params, h),
            q.len()
        );
    }

    for f in qualify_farms(&farms, &params, 12_100.0).iter().take(5) {
        println!(
            "  {:<5} P_eff {:>6.2} MW  R_beam {:>6.1} km  ground radius {:>6.1} km",
            f.base.farm_id,
            f.p_effective_mw,
            f.r_beam_m / 1e3,
            f.ground_radius_m(12_100.0) / 1e3
        );
    }
    Ok(())
}
