//! Beam link budget: farm capacity limits, the transmit-to-receive efficiency
//! chain, near-field diagnostics, received power and beam range.
//!
//! Powers are handled in watts inside this module and exposed in MW.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SolarFarmRecord;

const W_PER_MW: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamParams {
    pub eta_dc_rf: f64,
    pub eta_free: f64,
    pub eta_rf_dc: f64,
    pub eta_spot: f64,
    pub wavelength_m: f64,
    pub receiver_area_m2: f64,
    /// Ground-level exposure cap, W/m².
    pub safety_density_w_m2: f64,
    /// Minimum useful received power, MW.
    pub threshold_mw: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams {
            eta_dc_rf: 0.6887,
            eta_free: 0.95,
            eta_rf_dc: 0.7867,
            eta_spot: 0.87,
            wavelength_m: 0.05,
            receiver_area_m2: 261.6,
            safety_density_w_m2: 20.0,
            threshold_mw: 1.0,
        }
    }
}

impl BeamParams {
    pub fn validate(&self) -> Result<()> {
        for (name, eta) in [
            ("eta_dc_rf", self.eta_dc_rf),
            ("eta_free", self.eta_free),
            ("eta_rf_dc", self.eta_rf_dc),
            ("eta_spot", self.eta_spot),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Config(format!("beam_params.{name} must be in (0, 1], got {eta}")));
            }
        }
        for (name, v) in [
            ("wavelength_m", self.wavelength_m),
            ("receiver_area_m2", self.receiver_area_m2),
            ("safety_density_w_m2", self.safety_density_w_m2),
            ("threshold_mw", self.threshold_mw),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("beam_params.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Fraction of transmitted power captured at slant range `z_m`.
    pub fn transfer_coefficient(&self, z_m: f64) -> f64 {
        end_to_end_efficiency(self) * self.receiver_area_m2 / (PI * self.wavelength_m * z_m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AircraftParams {
    pub drag_n: f64,
    pub cruise_speed_mps: f64,
    pub prop_efficiency: f64,
    pub fuel_flow_kg_h: f64,
    pub cruise_altitude_m: f64,
}

impl Default for AircraftParams {
    /// A320-class hybrid-electric narrow-body.
    fn default() -> Self {
        AircraftParams {
            drag_n: 37_300.0,
            cruise_speed_mps: 235.0,
            prop_efficiency: 0.85,
            fuel_flow_kg_h: 2_200.0,
            cruise_altitude_m: 12_100.0,
        }
    }
}

impl AircraftParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("drag_n", self.drag_n),
            ("cruise_speed_mps", self.cruise_speed_mps),
            ("fuel_flow_kg_h", self.fuel_flow_kg_h),
            ("cruise_altitude_m", self.cruise_altitude_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("aircraft_params.{name} must be positive, got {v}")));
            }
        }
        if !(self.prop_efficiency > 0.0 && self.prop_efficiency <= 1.0) {
            return Err(Error::Config(format!(
                "aircraft_params.prop_efficiency must be in (0, 1], got {}",
                self.prop_efficiency
            )));
        }
        Ok(())
    }
}

pub fn end_to_end_efficiency(p: &BeamParams) -> f64 {
    p.eta_dc_rf * p.eta_free * p.eta_rf_dc * p.eta_spot
}

/// Propulsive power demand at cruise, MW.
pub fn cruise_power(a: &AircraftParams) -> f64 {
    a.drag_n * a.cruise_speed_mps / a.prop_efficiency / W_PER_MW
}

/// Exposure-limited transmit capacity of an aperture, MW.
pub fn safety_capacity(area_m2: f64, safety_density_w_m2: f64) -> f64 {
    safety_density_w_m2 * area_m2 / W_PER_MW
}

/// `min(safety capacity, DC capacity)`, MW.
pub fn effective_capacity(dc_capacity_mw: f64, area_m2: f64, safety_density_w_m2: f64) -> f64 {
    safety_capacity(area_m2, safety_density_w_m2).min(dc_capacity_mw)
}

pub fn fresnel_number(aperture_diameter_m: f64, wavelength_m: f64, z_m: f64) -> f64 {
    aperture_diameter_m.powi(2) / (4.0 * wavelength_m * z_m)
}

/// Radiative near field, where conjugate-phase focusing applies.
pub fn is_near_field(fresnel_number: f64) -> bool {
    fresnel_number >= 1.0
}

/// Focusing phase at aperture offset `(x, y)`, radians.
pub fn focusing_phase(x_m: f64, y_m: f64, wavelength_m: f64, z_m: f64) -> f64 {
    -PI * (x_m * x_m + y_m * y_m) / (wavelength_m * z_m)
}

/// Central-lobe spot diameter of the focused beam, m.
pub fn spot_diameter(aperture_diameter_m: f64, wavelength_m: f64, z_m: f64) -> f64 {
    2.44 * wavelength_m * z_m / aperture_diameter_m
}

/// Diameter of the circle with the farm's area.
pub fn equivalent_diameter(area_m2: f64) -> f64 {
    2.0 * (area_m2 / PI).sqrt()
}

/// Power arriving at the aircraft rectenna for `transmit_mw` sent over `z_m`, MW.
pub fn received_power(transmit_mw: f64, z_m: f64, params: &BeamParams) -> Result<f64> {
    if !(z_m > 0.0) {
        return Err(Error::InvalidInput(format!("slant range must be positive, got {z_m}")));
    }
    let transmit_w = transmit_mw * W_PER_MW;
    Ok(params.transfer_coefficient(z_m) * transmit_w / W_PER_MW)
}

/// Largest slant range at which `farm_mw` still delivers the threshold, m.
pub fn beam_range(farm_mw: f64, params: &BeamParams) -> f64 {
    let eta = end_to_end_efficiency(params);
    let (p_w, eps_w) = (farm_mw * W_PER_MW, params.threshold_mw * W_PER_MW);
    eta * params.receiver_area_m2 * p_w / (PI * params.wavelength_m * eps_w)
}

/// Smallest effective capacity whose beam range reaches `altitude_m`, MW.
pub fn min_qualifying_capacity(params: &BeamParams, altitude_m: f64) -> f64 {
    let eps_w = params.threshold_mw * W_PER_MW;
    PI * params.wavelength_m * eps_w * altitude_m / (end_to_end_efficiency(params) * params.receiver_area_m2) / W_PER_MW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualifiedFarm {
    pub base: SolarFarmRecord,
    pub p_safety_mw: f64,
    pub p_effective_mw: f64,
    pub r_beam_m: f64,
}

impl QualifiedFarm {
    /// Radius of the ground disk inside which an aircraft at `altitude_m`
    /// is within beam range, m.
    pub fn ground_radius_m(&self, altitude_m: f64) -> f64 {
        (self.r_beam_m.powi(2) - altitude_m.powi(2)).max(0.0).sqrt()
    }
}

/// Keeps the farms whose effective capacity reaches the minimum qualifying
/// capacity at `altitude_m`, in input order.
pub fn qualify_farms(farms: &[SolarFarmRecord], params: &BeamParams, altitude_m: f64) -> Vec<QualifiedFarm> {
    let threshold = min_qualifying_capacity(params, altitude_m);
    farms
        .iter()
        .filter_map(|f| {
            let p_safety_mw = safety_capacity(f.area_m2, params.safety_density_w_m2);
            let p_effective_mw = p_safety_mw.min(f.dc_capacity_mw);
            (p_effective_mw >= threshold).then(|| QualifiedFarm {
                base: f.clone(),
                p_safety_mw,
                p_effective_mw,
                r_beam_m: beam_range(p_effective_mw, params),
            })
        })
        .collect()
}
