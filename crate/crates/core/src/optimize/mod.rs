//! The two planning problems over a precomputed coverage set: choosing a
//! departure shift per flight, and choosing which farms and flights to equip
//! at given penetration rates.
//!
//! Each problem is built as an explicit MILP ([`BuiltModel`]) that can be
//! solved by the built-in branch-and-bound, approximated greedily, or
//! exported for an external solver.

mod bnb;
mod build;
mod greedy;
mod lpfile;
mod model;
mod simplex;
mod sweep;
mod validate;

use serde::{Deserialize, Serialize};

pub use bnb::{solve_exact, ExactOptions, MipResult, MipStatus};
pub use build::{build_choice_model, build_schedule_model, BuiltModel, PowerVar, ReceiverVar};
pub use greedy::{greedy_choice, greedy_schedule};
pub use lpfile::{export_model, import_solution, read_values, write_lp, write_mps, write_values, ModelFormat};
pub use model::{Constraint, Model, Sense, VarKind, Variable};
pub use simplex::{solve_lp, solve_relaxation, LpOutcome};
pub use sweep::{penetration_grid, penetration_sweep, ScenarioOutcome, SweepResult};
pub use validate::{validate_solution, ConstraintKind, Violation};

use crate::coverage::{CoverageSet, ShiftSet};
use crate::economics::{Rates, SavingsBreakdown};
use crate::error::{Error, Result};
use crate::physics::QualifiedFarm;

/// Everything both problems share: the coverage tensor, farm capacities and
/// the objective's rates.
#[derive(Debug, Clone)]
pub struct BeamNetwork {
    pub coverage: CoverageSet,
    pub farm_capacity_mw: Vec<f64>,
    pub flight_ids: Vec<String>,
    pub rates: Rates,
    pub threshold_mw: f64,
}

impl BeamNetwork {
    pub fn new(
        coverage: CoverageSet,
        farms: &[QualifiedFarm],
        flight_ids: Vec<String>,
        rates: Rates,
        threshold_mw: f64,
    ) -> Result<Self> {
        Self::from_capacities(
            coverage,
            farms.iter().map(|f| f.p_effective_mw).collect(),
            flight_ids,
            rates,
            threshold_mw,
        )
    }

    pub fn from_capacities(
        coverage: CoverageSet,
        farm_capacity_mw: Vec<f64>,
        flight_ids: Vec<String>,
        rates: Rates,
        threshold_mw: f64,
    ) -> Result<Self> {
        if coverage.n_farms != farm_capacity_mw.len() || coverage.n_flights != flight_ids.len() {
            return Err(Error::InvalidInput(format!(
                "coverage has {} farms / {} flights but {} capacities / {} flight ids were given",
                coverage.n_farms,
                coverage.n_flights,
                farm_capacity_mw.len(),
                flight_ids.len()
            )));
        }
        if coverage.airborne.len() != coverage.n_flights {
            return Err(Error::InvalidInput("airborne table does not match flight count".into()));
        }
        if let Some(e) = coverage.entries.iter().find(|e| {
            e.farm as usize >= coverage.n_farms
                || e.flight as usize >= coverage.n_flights
                || e.t as usize >= coverage.grid.n_steps
                || !(e.coef > 0.0)
        }) {
            return Err(Error::InvalidInput(format!("coverage entry out of range: {e:?}")));
        }
        if !(threshold_mw > 0.0) {
            return Err(Error::InvalidInput("threshold must be positive".into()));
        }
        Ok(BeamNetwork {
            coverage,
            farm_capacity_mw,
            flight_ids,
            rates,
            threshold_mw,
        })
    }

    pub fn n_farms(&self) -> usize {
        self.coverage.n_farms
    }

    pub fn n_flights(&self) -> usize {
        self.coverage.n_flights
    }

    pub fn dt_s(&self) -> i64 {
        self.coverage.grid.dt_s
    }

    /// Objective coefficient of one MW received for one grid step, in $.
    pub fn objective_per_mw_step(&self) -> f64 {
        self.rates.net_rate() * self.dt_s() as f64 / 3600.0
    }

    /// The same network with the shift dimension collapsed to `{0}`.
    pub fn zero_shift_baseline(&self) -> Result<BeamNetwork> {
        let shifts = ShiftSet::new(0, self.dt_s())?;
        Ok(BeamNetwork {
            coverage: self.coverage.with_shifts(&shifts),
            ..self.clone()
        })
    }

    /// The same network with a shift set applied (or replaced).
    pub fn with_shifts(&self, shifts: &ShiftSet) -> BeamNetwork {
        BeamNetwork {
            coverage: self.coverage.with_shifts(shifts),
            ..self.clone()
        }
    }

    /// The same network without a shift dimension.
    pub fn without_shifts(&self) -> BeamNetwork {
        BeamNetwork {
            coverage: self.coverage.without_shifts(),
            ..self.clone()
        }
    }

    /// Turns total received energy into the reported objective.
    pub fn savings(&self, energy_mwh: f64, duration_min: f64) -> SavingsBreakdown {
        self.rates.breakdown(energy_mwh, duration_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penetration {
    pub rho_farm: f64,
    pub rho_flight: f64,
}

impl Penetration {
    pub fn new(rho_farm: f64, rho_flight: f64) -> Result<Self> {
        for (name, v) in [("rho_farm", rho_farm), ("rho_flight", rho_flight)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Penetration { rho_farm, rho_flight })
    }

    pub fn full() -> Self {
        Penetration {
            rho_farm: 1.0,
            rho_flight: 1.0,
        }
    }

    pub fn farm_count(&self, n: usize) -> usize {
        equipped_count(self.rho_farm, n)
    }

    pub fn flight_count(&self, n: usize) -> usize {
        equipped_count(self.rho_flight, n)
    }
}

/// `rho * n` rounded to nearest with ties to even, clamped to `[0, n]`.
pub fn equipped_count(rho: f64, n: usize) -> usize {
    let k = (rho * n as f64).round_ties_even();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum ProblemKind {
    Schedule,
    Choice(Penetration),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Variables only where coverage exists.
    #[default]
    Sparse,
    /// Every farm x flight x step (x shift) combination, for inspection and
    /// size accounting.
    Dense,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub layout: Layout,
    /// Upper bound on received power (the aircraft's cruise demand), if set.
    pub cruise_cap_mw: Option<f64>,
    /// Each farm serves at most one aircraft per step.
    pub single_target_per_farm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "gap", rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Heuristic,
    BoundGap(f64),
    Infeasible,
    /// Read back from an external solver's output and validated.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub farm: usize,
    pub flight: usize,
    pub t: usize,
    pub shift: i32,
    pub power_mw: f64,
    /// Power arriving at the aircraft from this allocation.
    pub delivered_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Received {
    pub flight: usize,
    pub t: usize,
    pub power_mw: f64,
    pub beaming: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub problem: ProblemKind,
    pub objective: f64,
    pub status: SolveStatus,
    pub savings: SavingsBreakdown,
    /// Per-flight departure shift in grid steps (schedule problem only).
    pub shifts_chosen: Vec<i32>,
    pub selected_farms: Vec<usize>,
    pub selected_flights: Vec<usize>,
    /// Sorted by `(flight, t, farm)`.
    pub allocations: Vec<Allocation>,
    /// Sorted by `(flight, t)`; only steps with power or an active indicator.
    pub received: Vec<Received>,
}

impl Solution {
    pub fn energy_mwh(&self) -> f64 {
        self.savings.energy_mwh
    }

    pub fn beaming_minutes(&self) -> f64 {
        self.savings.duration_min
    }

    /// Fills energy, duration and objective from `received`.
    pub(crate) fn finish(mut self, net: &BeamNetwork) -> Solution {
        let dt = net.dt_s() as f64;
        let energy: f64 = self.received.iter().map(|r| r.power_mw * dt / 3600.0).sum();
        let minutes = self.received.iter().filter(|r| r.beaming).count() as f64 * dt / 60.0;
        self.savings = net.savings(energy, minutes);
        self.objective = self.savings.total;
        self
    }

    pub(crate) fn empty(net: &BeamNetwork, problem: ProblemKind, status: SolveStatus) -> Solution {
        Solution {
            problem,
            objective: 0.0,
            status,
            savings: SavingsBreakdown::default(),
            shifts_chosen: match problem {
                ProblemKind::Schedule => vec![0; net.n_flights()],
                ProblemKind::Choice(_) => Vec::new(),
            },
            selected_farms: Vec::new(),
            selected_flights: Vec::new(),
            allocations: Vec::new(),
            received: Vec::new(),
        }
    }

    /// Flights whose chosen shift is non-zero.
    pub fn shifted_flights(&self) -> usize {
        self.shifts_chosen.iter().filter(|&&s| s != 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Exact(ExactOptions),
    Greedy,
}

/// Solves the shift-choice problem. The exact backend splits flights into
/// groups that share no farm at any step and solves each group separately.
pub fn solve_schedule(net: &BeamNetwork, backend: &Backend, opts: &ModelOptions) -> Result<Solution> {
    if net.coverage.shifts.is_none() {
        return Err(Error::InvalidInput("the schedule problem needs a coverage set with shifts".into()));
    }
    let sol = match backend {
        Backend::Greedy => greedy_schedule(net, opts),
        Backend::Exact(exact) => build::solve_schedule_exact(net, exact, opts)?,
    };
    validate_solution(net, opts, &sol).map_err(Error::Rejected)?;
    Ok(sol)
}

/// Solves the equipment-choice problem at one penetration level.
pub fn solve_choice(net: &BeamNetwork, pen: Penetration, backend: &Backend, opts: &ModelOptions) -> Result<Solution> {
    if net.coverage.shifts.is_some() {
        return Err(Error::InvalidInput("the choice problem needs a coverage set without shifts".into()));
    }
    let sol = match backend {
        Backend::Greedy => greedy_choice(net, pen, opts),
        Backend::Exact(exact) => build::solve_choice_exact(net, pen, exact, opts)?,
    };
    validate_solution(net, opts, &sol).map_err(Error::Rejected)?;
    Ok(sol)
}

/// Objective of the LP relaxation of the full model: an upper bound on any
/// feasible plan.
pub fn relaxation_bound(built: &BuiltModel) -> Result<f64> {
    match solve_relaxation(&built.model)? {
        LpOutcome::Optimal { objective, .. } => Ok(objective),
        LpOutcome::Infeasible => Err(Error::Infeasible),
        LpOutcome::Unbounded => Err(Error::Unbounded),
    }
}
