//! Saving and cost rates of beamed energy, and the fuel/CO2 decomposition of
//! the net saving.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{cruise_power, AircraftParams};

/// Placeholder prices; override them to reproduce a particular study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconomicParams {
    /// $/kg of jet fuel.
    pub fuel_price: f64,
    /// kg CO2 per kg of fuel burned.
    pub fuel_emission: f64,
    /// $/MWh of beamed electricity.
    pub elec_price: f64,
    /// kg CO2 per MWh of solar electricity.
    pub solar_emission: f64,
    /// $/kg CO2.
    pub carbon_price: f64,
}

impl Default for EconomicParams {
    fn default() -> Self {
        EconomicParams {
            fuel_price: 0.80,
            fuel_emission: 3.16,
            elec_price: 30.0,
            solar_emission: 40.0,
            carbon_price: 0.19,
        }
    }
}

impl EconomicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fuel_price", self.fuel_price),
            ("fuel_emission", self.fuel_emission),
            ("elec_price", self.elec_price),
            ("solar_emission", self.solar_emission),
            ("carbon_price", self.carbon_price),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("economic_params.{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Fuel plus fuel-CO2 cost avoided per MWh received, $/MWh.
pub fn saving_rate(e: &EconomicParams, a: &AircraftParams, p_cruise_mw: f64) -> f64 {
    saving_rate_for_flow(e, a.fuel_flow_kg_h, p_cruise_mw)
}

fn saving_rate_for_flow(e: &EconomicParams, fuel_flow_kg_h: f64, p_cruise_mw: f64) -> f64 {
    (fuel_flow_kg_h * e.fuel_price + fuel_flow_kg_h * e.fuel_emission * e.carbon_price) / p_cruise_mw
}

/// Electricity plus solar-CO2 cost per MWh delivered, $/MWh.
pub fn cost_rate(e: &EconomicParams) -> f64 {
    e.elec_price + e.solar_emission * e.carbon_price
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SavingsBreakdown {
    pub energy_mwh: f64,
    pub duration_min: f64,
    pub fuel_saving: f64,
    pub co2_saving: f64,
    pub elec_cost: f64,
    pub co2_kg_avoided: f64,
    pub total: f64,
}

impl std::ops::Add for SavingsBreakdown {
    type Output = SavingsBreakdown;

    fn add(self, o: SavingsBreakdown) -> SavingsBreakdown {
        SavingsBreakdown {
            energy_mwh: self.energy_mwh + o.energy_mwh,
            duration_min: self.duration_min + o.duration_min,
            fuel_saving: self.fuel_saving + o.fuel_saving,
            co2_saving: self.co2_saving + o.co2_saving,
            elec_cost: self.elec_cost + o.elec_cost,
            co2_kg_avoided: self.co2_kg_avoided + o.co2_kg_avoided,
            total: self.total + o.total,
        }
    }
}

/// The objective's two rates, fixed for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub economic: EconomicParams,
    pub fuel_flow_kg_h: f64,
    pub p_cruise_mw: f64,
}

impl Rates {
    pub fn new(economic: EconomicParams, aircraft: &AircraftParams) -> Self {
        Rates {
            economic,
            fuel_flow_kg_h: aircraft.fuel_flow_kg_h,
            p_cruise_mw: cruise_power(aircraft),
        }
    }

    pub fn saving_rate(&self) -> f64 {
        saving_rate_for_flow(&self.economic, self.fuel_flow_kg_h, self.p_cruise_mw)
    }

    pub fn cost_rate(&self) -> f64 {
        cost_rate(&self.economic)
    }

    /// Net $ per MWh received; the optimizer's objective coefficient per
    /// MWh comes from here.
    pub fn net_rate(&self) -> f64 {
        self.saving_rate() - self.cost_rate()
    }

    pub fn breakdown(&self, energy_mwh: f64, duration_min: f64) -> SavingsBreakdown {
        // empty float sums are -0.0
        let (energy_mwh, duration_min) = (energy_mwh + 0.0, duration_min + 0.0);
        let e = &self.economic;
        let fuel_per_mwh = self.fuel_flow_kg_h / self.p_cruise_mw;
        let fuel_saving = energy_mwh * fuel_per_mwh * e.fuel_price - energy_mwh * e.elec_price;
        let co2_saving = energy_mwh * fuel_per_mwh * e.fuel_emission * e.carbon_price
            - energy_mwh * e.solar_emission * e.carbon_price;
        SavingsBreakdown {
            energy_mwh,
            duration_min,
            fuel_saving,
            co2_saving,
            elec_cost: energy_mwh * self.cost_rate(),
            co2_kg_avoided: energy_mwh * (fuel_per_mwh * e.fuel_emission - e.solar_emission),
            total: fuel_saving + co2_saving,
        }
    }
}

pub fn breakdown(
    energy_mwh: f64,
    duration_min: f64,
    e: &EconomicParams,
    a: &AircraftParams,
    p_cruise_mw: f64,
) -> SavingsBreakdown {
    Rates {
        economic: *e,
        fuel_flow_kg_h: a.fuel_flow_kg_h,
        p_cruise_mw,
    }
    .breakdown(energy_mwh, duration_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zero_prices() -> EconomicParams {
        EconomicParams {
            fuel_price: 0.0,
            fuel_emission: 0.0,
            elec_price: 0.0,
            solar_emission: 0.0,
            carbon_price: 0.0,
        }
    }

    #[test]
    fn saving_rate_fuel_only() {
        let e = EconomicParams {
            fuel_price: 1.0,
            carbon_price: 0.0,
            ..EconomicParams::default()
        };
        let r = saving_rate(&e, &AircraftParams::default(), 10.31);
        assert!((r - 213.39).abs() < 0.01, "{r}");
        assert_eq!(saving_rate(&zero_prices(), &AircraftParams::default(), 10.31), 0.0);
        let e2 = EconomicParams { fuel_price: 2.0, ..e };
        assert!((saving_rate(&e2, &AircraftParams::default(), 10.31) - 2.0 * r).abs() < 1e-9);
    }

    #[test]
    fn cost_rate_cases() {
        let only_elec = EconomicParams {
            elec_price: 30.0,
            solar_emission: 0.0,
            ..EconomicParams::default()
        };
        assert_eq!(cost_rate(&only_elec), 30.0);
        assert_eq!(cost_rate(&zero_prices()), 0.0);
        let mixed = EconomicParams {
            elec_price: 30.0,
            solar_emission: 40.0,
            carbon_price: 0.05,
            ..EconomicParams::default()
        };
        assert!((cost_rate(&mixed) - 32.0).abs() < 1e-12);
    }

    #[test]
    fn zero_energy_is_all_zero() {
        let b = breakdown(0.0, 0.0, &EconomicParams::default(), &AircraftParams::default(), 10.31);
        assert_eq!(b, SavingsBreakdown::default());
    }

    #[test]
    fn defaults_give_positive_net_saving() {
        let rates = Rates::new(EconomicParams::default(), &AircraftParams::default());
        assert!(rates.saving_rate() > rates.cost_rate());
        assert!(rates.breakdown(3.5, 10.0).total > 0.0);
    }

    proptest! {
        #[test]
        fn decomposition_identity(
            energy in 0.0f64..1e4,
            fuel_price in 0.0f64..5.0,
            fuel_emission in 0.0f64..5.0,
            elec_price in 0.0f64..200.0,
            solar_emission in 0.0f64..100.0,
            carbon_price in 0.0f64..1.0,
            fuel_flow in 100.0f64..5000.0,
            p_cruise in 1.0f64..30.0,
        ) {
            let e = EconomicParams { fuel_price, fuel_emission, elec_price, solar_emission, carbon_price };
            let a = AircraftParams { fuel_flow_kg_h: fuel_flow, ..AircraftParams::default() };
            let b = breakdown(energy, 0.0, &e, &a, p_cruise);
            let scale = b.total.abs().max(b.fuel_saving.abs()).max(b.co2_saving.abs()).max(1e-12);
            prop_assert!((b.total - (b.fuel_saving + b.co2_saving)).abs() <= 1e-9 * scale);
            let direct = energy * (saving_rate(&e, &a, p_cruise) - cost_rate(&e));
            prop_assert!((b.total - direct).abs() <= 1e-9 * direct.abs().max(scale));
        }

        #[test]
        fn breakdown_is_linear_in_energy(x in 0.0f64..1e3, y in 0.0f64..1e3) {
            let rates = Rates::new(EconomicParams::default(), &AircraftParams::default());
            let sum = rates.breakdown(x, 1.0) + rates.breakdown(y, 2.0);
            let joint = rates.breakdown(x + y, 3.0);
            prop_assert!((sum.total - joint.total).abs() <= 1e-9 * joint.total.abs().max(1.0));
            prop_assert!((sum.co2_kg_avoided - joint.co2_kg_avoided).abs() <= 1e-9 * joint.co2_kg_avoided.abs().max(1.0));
        }
    }
}
