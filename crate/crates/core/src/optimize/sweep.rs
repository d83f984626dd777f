//! Equipment-choice solves across a grid of penetration rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_choice, Backend, BeamNetwork, ModelOptions, Penetration, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub penetration: Penetration,
    /// The solution, or the backend's error message.
    pub result: Result<Solution, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scenarios: Vec<ScenarioOutcome>,
    /// Number of solved scenarios selecting each farm.
    pub farm_frequency: Vec<u32>,
}

/// Every `(rho_farm, rho_flight)` pair, farm rate varying slowest.
pub fn penetration_grid(farm_rates: &[f64], flight_rates: &[f64]) -> Vec<Penetration> {
    farm_rates
        .iter()
        .flat_map(|&rf| {
            flight_rates.iter().map(move |&ri| Penetration {
                rho_farm: rf,
                rho_flight: ri,
            })
        })
        .collect()
}

/// Solves each scenario independently (in parallel); a failing scenario is
/// recorded and the sweep carries on.
pub fn penetration_sweep(
    net: &BeamNetwork,
    grid: &[Penetration],
    backend: &Backend,
    opts: &ModelOptions,
) -> SweepResult {
    let scenarios: Vec<ScenarioOutcome> = grid
        .par_iter()
        .map(|&pen| ScenarioOutcome {
            penetration: pen,
            result: Penetration::new(pen.rho_farm, pen.rho_flight)
                .and_then(|pen| solve_choice(net, pen, backend, opts))
                .map_err(|e| e.to_string()),
        })
        .collect();
    let mut farm_frequency = vec![0u32; net.n_farms()];
    for sol in scenarios.iter().filter_map(|s| s.result.as_ref().ok()) {
        for &f in &sol.selected_farms {
            farm_frequency[f] += 1;
        }
    }
    SweepResult {
        scenarios,
        farm_frequency,
    }
}
