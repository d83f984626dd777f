//! Post-solve feasibility check shared by every backend and by solution
//! import.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BeamNetwork, ModelOptions, ProblemKind, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Variable bounds and value shape.
    Bounds,
    /// Exactly one departure shift per flight.
    OneShift,
    /// Power only along a covered link, under the chosen shift or to a
    /// selected farm.
    AllocationLink,
    /// Per-farm, per-step power budget.
    FarmCapacity,
    /// Received power equals the sum of delivered contributions.
    ReceivedBalance,
    /// Power received only while airborne.
    Airborne,
    /// Power received only by equipped flights.
    FlightSelection,
    /// Power sent only by equipped farms.
    FarmSelection,
    /// Equipped counts match the penetration rates.
    Penetration,
    /// An active transfer carries at least the threshold.
    MinReceivedPower,
    /// No power without an active transfer.
    ReceiveIndicator,
    CruiseCap,
    SingleTarget,
    /// Reported energy and objective agree with the received power.
    Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintKind,
    pub detail: String,
}

impl Violation {
    pub fn new(constraint: ConstraintKind, detail: impl Into<String>) -> Self {
        Violation {
            constraint,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.constraint, self.detail)
    }
}

impl std::error::Error for Violation {}

fn tol(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

fn fail<T>(kind: ConstraintKind, detail: String) -> Result<T, Violation> {
    Err(Violation::new(kind, detail))
}

/// Checks every solution invariant; the first violated constraint is
/// reported.
pub fn validate_solution(net: &BeamNetwork, opts: &ModelOptions, sol: &Solution) -> Result<(), Violation> {
    use ConstraintKind::*;
    let cov = &net.coverage;
    let cap = &net.farm_capacity_mw;
    let eps = net.threshold_mw;

    for a in &sol.allocations {
        if a.farm >= net.n_farms() || a.flight >= net.n_flights() || a.t >= cov.grid.n_steps {
            return fail(Bounds, format!("allocation index out of range: {a:?}"));
        }
        if !(a.power_mw >= -tol(0.0)) {
            return fail(Bounds, format!("negative power {} at {a:?}", a.power_mw));
        }
    }
    for r in &sol.received {
        if r.flight >= net.n_flights() || r.t >= cov.grid.n_steps {
            return fail(Bounds, format!("received index out of range: {r:?}"));
        }
        if !(r.power_mw >= -tol(0.0)) {
            return fail(Bounds, format!("negative received power {} at {r:?}", r.power_mw));
        }
    }

    let mut farm_load: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for a in &sol.allocations {
        *farm_load.entry((a.farm, a.t)).or_default() += a.power_mw;
    }
    for (&(f, t), &load) in &farm_load {
        if load > cap[f] + tol(cap[f]) {
            return fail(
                FarmCapacity,
                format!("farm {f} sends {load} MW at step {t}, capacity {} MW", cap[f]),
            );
        }
    }

    let coef_of: HashMap<(usize, usize, usize, i32), f64> = cov
        .entries
        .iter()
        .map(|e| ((e.farm as usize, e.flight as usize, e.t as usize, e.shift as i32), e.coef))
        .collect();
    let shifts = cov.shift_values();
    match sol.problem {
        ProblemKind::Schedule => {
            if sol.shifts_chosen.len() != net.n_flights() {
                return fail(
                    OneShift,
                    format!("{} shifts for {} flights", sol.shifts_chosen.len(), net.n_flights()),
                );
            }
            if let Some((i, s)) = sol.shifts_chosen.iter().enumerate().find(|(_, s)| !shifts.contains(s)) {
                return fail(OneShift, format!("flight {i} takes inadmissible shift {s}"));
            }
        }
        ProblemKind::Choice(pen) => {
            for (set, n, kind) in [
                (&sol.selected_farms, net.n_farms(), FarmSelection),
                (&sol.selected_flights, net.n_flights(), FlightSelection),
            ] {
                let unique: HashSet<usize> = set.iter().copied().collect();
                if unique.len() != set.len() || set.iter().any(|&k| k >= n) {
                    return fail(kind, format!("malformed selection {set:?}"));
                }
            }
            let (kf, ki) = (pen.farm_count(net.n_farms()), pen.flight_count(net.n_flights()));
            if sol.selected_farms.len() != kf || sol.selected_flights.len() != ki {
                return fail(
                    Penetration,
                    format!(
                        "{} farms / {} flights selected, expected {kf} / {ki}",
                        sol.selected_farms.len(),
                        sol.selected_flights.len()
                    ),
                );
            }
        }
    }
    let farm_on: HashSet<usize> = sol.selected_farms.iter().copied().collect();
    let flight_on: HashSet<usize> = sol.selected_flights.iter().copied().collect();

    let mut delivered: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for a in &sol.allocations {
        let Some(&coef) = coef_of.get(&(a.farm, a.flight, a.t, a.shift)) else {
            return fail(AllocationLink, format!("no coverage for farm {} -> flight {} at step {} shift {}", a.farm, a.flight, a.t, a.shift));
        };
        match sol.problem {
            ProblemKind::Schedule => {
                if a.shift != sol.shifts_chosen[a.flight] && a.power_mw > tol(0.0) {
                    return fail(
                        AllocationLink,
                        format!(
                            "flight {} receives under shift {} but takes shift {}",
                            a.flight, a.shift, sol.shifts_chosen[a.flight]
                        ),
                    );
                }
            }
            ProblemKind::Choice(_) => {
                if !farm_on.contains(&a.farm) && a.power_mw > tol(0.0) {
                    return fail(AllocationLink, format!("unequipped farm {} sends power", a.farm));
                }
            }
        }
        *delivered.entry((a.flight, a.t)).or_default() += coef * a.power_mw;
    }

    let received: BTreeMap<(usize, usize), (f64, bool)> =
        sol.received.iter().map(|r| ((r.flight, r.t), (r.power_mw, r.beaming))).collect();
    if received.len() != sol.received.len() {
        return fail(Bounds, "duplicate received entries".into());
    }
    let keys: std::collections::BTreeSet<(usize, usize)> = delivered.keys().chain(received.keys()).copied().collect();
    for &(i, t) in &keys {
        let sum = delivered.get(&(i, t)).copied().unwrap_or(0.0);
        let (r, _) = received.get(&(i, t)).copied().unwrap_or((0.0, false));
        if (r - sum).abs() > tol(sum) {
            return fail(
                ReceivedBalance,
                format!("flight {i} step {t}: received {r} MW but allocations deliver {sum} MW"),
            );
        }
    }

    for (&(i, t), &(r, beaming)) in &received {
        match sol.problem {
            ProblemKind::Schedule => {
                if (beaming || r > tol(0.0)) && !cov.is_airborne(i, t, sol.shifts_chosen[i]) {
                    return fail(Airborne, format!("flight {i} receives at step {t} while on the ground"));
                }
            }
            ProblemKind::Choice(_) => {
                if (beaming || r > tol(0.0)) && !flight_on.contains(&i) {
                    return fail(FlightSelection, format!("unequipped flight {i} receives at step {t}"));
                }
            }
        }
        if beaming && r < eps - tol(eps) {
            return fail(
                MinReceivedPower,
                format!("flight {i} step {t}: active transfer of {r} MW is below the {eps} MW threshold"),
            );
        }
        if !beaming && r > tol(0.0) {
            return fail(ReceiveIndicator, format!("flight {i} step {t}: {r} MW received while inactive"));
        }
        if let Some(c) = opts.cruise_cap_mw {
            if r > c + tol(c) {
                return fail(CruiseCap, format!("flight {i} step {t}: {r} MW exceeds the {c} MW cap"));
            }
        }
    }

    if opts.single_target_per_farm {
        let mut targets: BTreeMap<(usize, usize), HashSet<usize>> = BTreeMap::new();
        for a in sol.allocations.iter().filter(|a| a.power_mw > tol(0.0)) {
            targets.entry((a.farm, a.t)).or_default().insert(a.flight);
        }
        if let Some(((f, t), set)) = targets.iter().find(|(_, s)| s.len() > 1) {
            return fail(SingleTarget, format!("farm {f} serves {} aircraft at step {t}", set.len()));
        }
    }

    let dt = net.dt_s() as f64;
    let energy: f64 = sol.received.iter().map(|r| r.power_mw * dt / 3600.0).sum();
    let expected = net.savings(energy, sol.savings.duration_min).total;
    if (sol.savings.energy_mwh - energy).abs() > tol(energy) || (sol.objective - expected).abs() > tol(expected) {
        return fail(
            Objective,
            format!("reported {} MWh / ${} but received power implies {energy} MWh / ${expected}", sol.savings.energy_mwh, sol.objective),
        );
    }
    Ok(())
}
