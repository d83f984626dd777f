//! Discretize one flight along its great circle and check the link budget
//! from a farm under the path.

use skybeam::geo::{discretize_flight, slant_range, GroundPoint};
use skybeam::ingest::{Airport, AirportTable, FlightRecord};
use skybeam::physics::{equivalent_diameter, fresnel_number, is_near_field, received_power, spot_diameter, BeamParams};

fn airport(code: &str, lat: f64, lon: f64) -> (String, Airport) {
    let a = Airport {
        code: code.into(),
        lat,
        lon,
        utc_offset_hours: -6.0,
    };
    (code.into(), a)
}

fn main() -> skybeam::Result<()> {
    let airports: AirportTable = [airport("DFW", 32.8998, -97.0403), airport("AUS", 30.1975, -97.6664)].into();
    let flight = FlightRecord {
        flight_id: "DA100".into(),
        origin: "DFW".into(),
        destination: "AUS".into(),
        wheels_off_utc: 1_768_394_400,
        elapsed_s: 50 * 60,
    };
    let tr = discretize_flight(&flight, &airports, 12_100.0, 300)?;
    println!("{} km in {} samples", tr.ground_distance_km.round(), tr.samples.len());

    let farm = GroundPoint::new(31.555, -97.345)?;
    let params = BeamParams::default();
    let aperture = equivalent_diameter(2.0e6);
    for s in &tr.samples {
        let z = slant_range(farm, s.ground, tr.altitude_m);
        let nf = fresnel_number(aperture, params.wavelength_m, z);
        println!(
            "t+{:>4}s  ({:.3}, {:.3})  z {:>7.1} km  N_F {:>6.1}{}  spot {:>5.1} m  30 MW -> {:.2} MW",
            s.t_utc - tr.wheels_off_utc,
            s.ground.lat,
            s.ground.lon,
            z / 1e3,
            nf,
            if is_near_field(nf) { " near" } else { "  far" },
            spot_diameter(aperture, params.wavelength_m, z),
            received_power(30.0, z, &params)?
        );
    }
    Ok(())
}
