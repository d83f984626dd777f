//! MILP construction for both problems, plus the mapping between model
//! values and [`Solution`]s.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::bnb::{solve_exact, ExactOptions, MipStatus};
use super::greedy::{greedy_choice, greedy_schedule};
use super::model::{Model, Sense, VarKind};
use super::validate::{ConstraintKind, Violation};
use super::{
    Allocation, BeamNetwork, Layout, ModelOptions, Penetration, ProblemKind, Received, Solution, SolveStatus,
};
use crate::coverage::CoverageEntry;
use crate::error::{Error, Result};

const VALUE_TOL: f64 = 1e-9;
const BINARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerVar {
    pub farm: usize,
    pub flight: usize,
    pub t: usize,
    pub shift: i32,
    /// Transfer coefficient; zero where the dense layout has no coverage.
    pub coef: f64,
    pub var: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverVar {
    pub flight: usize,
    pub t: usize,
    pub r: usize,
    pub b: usize,
    /// Largest received power achievable at this step.
    pub big_m: f64,
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: Model,
    pub problem: ProblemKind,
    pub options: ModelOptions,
    /// Flights represented in the model (all flights, or one component).
    pub flights: Vec<usize>,
    pub shift_values: Vec<i32>,
    /// `shift_vars[k][j]`: flight `flights[k]` takes `shift_values[j]`.
    pub shift_vars: Vec<Vec<usize>>,
    pub farm_vars: Vec<usize>,
    pub flight_vars: Vec<usize>,
    pub power: Vec<PowerVar>,
    pub receivers: Vec<ReceiverVar>,
    /// `(farm, flight, t, var)` target indicators when farms serve one
    /// aircraft per step.
    pub targets: Vec<(usize, usize, usize, usize)>,
}

fn shift_label(s: i32) -> String {
    if s < 0 {
        format!("m{}", -s)
    } else {
        s.to_string()
    }
}

/// Power variables for the given flights, in `(flight, t, farm, shift)`
/// order for the sparse layout and `(farm, flight, t, shift)` for the dense.
fn power_layout(net: &BeamNetwork, flights: &[usize], shifts: &[i32], layout: Layout) -> Vec<(CoverageEntry, bool)> {
    let included: Vec<bool> = {
        let mut v = vec![false; net.n_flights()];
        for &i in flights {
            v[i] = true;
        }
        v
    };
    let covered = net.coverage.entries.iter().filter(|e| included[e.flight as usize]);
    match layout {
        Layout::Sparse => covered.map(|e| (*e, true)).collect(),
        Layout::Dense => {
            let lookup: HashMap<(u32, u32, u32, i16), CoverageEntry> =
                covered.map(|e| ((e.farm, e.flight, e.t, e.shift), *e)).collect();
            let mut out = Vec::new();
            for f in 0..net.n_farms() as u32 {
                for &i in flights {
                    for t in 0..net.coverage.grid.n_steps as u32 {
                        for &s in shifts {
                            let key = (f, i as u32, t, s as i16);
                            out.push(match lookup.get(&key) {
                                Some(e) => (*e, true),
                                None => (
                                    CoverageEntry {
                                        farm: f,
                                        flight: i as u32,
                                        t,
                                        shift: s as i16,
                                        z_m: 0.0,
                                        coef: 0.0,
                                    },
                                    false,
                                ),
                            });
                        }
                    }
                }
            }
            out
        }
    }
}

struct Common {
    power: Vec<PowerVar>,
    receivers: Vec<ReceiverVar>,
    targets: Vec<(usize, usize, usize, usize)>,
}

/// Adds power, receiver and target variables plus every row that does not
/// involve the structural binaries. `link` and `receiver_gate` add the rows
/// that do.
fn add_common(
    m: &mut Model,
    net: &BeamNetwork,
    flights: &[usize],
    shifts: &[i32],
    shifted: bool,
    opts: &ModelOptions,
    mut link: impl FnMut(&mut Model, &PowerVar, bool),
    mut receiver_gate: impl FnMut(&mut Model, &ReceiverVar, &BTreeMap<i32, f64>),
) -> Common {
    let layout = power_layout(net, flights, shifts, opts.layout);
    let cap = &net.farm_capacity_mw;
    let mut power = Vec::with_capacity(layout.len());
    for (e, _) in &layout {
        let name = if shifted {
            format!("p_{}_{}_{}_{}", e.farm, e.flight, e.t, shift_label(e.shift as i32))
        } else {
            format!("p_{}_{}_{}", e.farm, e.flight, e.t)
        };
        let var = m.continuous(name, 0.0);
        power.push(PowerVar {
            farm: e.farm as usize,
            flight: e.flight as usize,
            t: e.t as usize,
            shift: e.shift as i32,
            coef: e.coef,
            var,
        });
    }

    // Receivers: every (flight, step) with coverage, or all of them when dense.
    let mut by_receiver: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, pv) in power.iter().enumerate() {
        by_receiver.entry((pv.flight, pv.t)).or_default().push(k);
    }
    if opts.layout == Layout::Dense {
        for &i in flights {
            for t in 0..net.coverage.grid.n_steps {
                by_receiver.entry((i, t)).or_default();
            }
        }
    }
    let per_mw_step = net.objective_per_mw_step();
    let eps = net.threshold_mw;
    let mut receivers = Vec::with_capacity(by_receiver.len());
    let mut receiver_shift_caps = Vec::with_capacity(by_receiver.len());
    for (&(i, t), ks) in &by_receiver {
        // Best achievable received power per shift.
        let mut per_shift: BTreeMap<i32, f64> = BTreeMap::new();
        for &k in ks {
            let pv = &power[k];
            if pv.coef > 0.0 {
                *per_shift.entry(pv.shift).or_default() += pv.coef * cap[pv.farm];
            }
        }
        if let Some(c) = opts.cruise_cap_mw {
            for v in per_shift.values_mut() {
                *v = v.min(c);
            }
        }
        let big_m = per_shift.values().copied().fold(0.0, f64::max);
        let dead = big_m < eps;
        let r_ub = if dead { 0.0 } else { opts.cruise_cap_mw.unwrap_or(f64::INFINITY) };
        let r = m.add_var(format!("r_{i}_{t}"), VarKind::Continuous, 0.0, r_ub, per_mw_step);
        let b = m.add_var(format!("b_{i}_{t}"), VarKind::Binary, 0.0, if dead { 0.0 } else { 1.0 }, 0.0);
        receivers.push(ReceiverVar {
            flight: i,
            t,
            r,
            b,
            big_m,
        });
        receiver_shift_caps.push(per_shift);
    }

    let mut targets = Vec::new();
    if opts.single_target_per_farm {
        let pairs: std::collections::BTreeSet<(usize, usize, usize)> = power
            .iter()
            .filter(|pv| pv.coef > 0.0)
            .map(|pv| (pv.farm, pv.flight, pv.t))
            .collect();
        for (f, i, t) in pairs {
            let y = m.binary(format!("y_{f}_{i}_{t}"));
            targets.push((f, i, t, y));
        }
    }

    for pv in &power {
        link(m, pv, pv.coef > 0.0);
    }

    let mut farm_steps: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for pv in &power {
        farm_steps.entry((pv.farm, pv.t)).or_default().push(pv.var);
    }
    if opts.layout == Layout::Dense {
        for f in 0..net.n_farms() {
            for t in 0..net.coverage.grid.n_steps {
                farm_steps.entry((f, t)).or_default();
            }
        }
    }
    let farm_step_rows: Vec<((usize, usize), Vec<usize>)> = farm_steps.into_iter().collect();

    Common {
        power,
        receivers,
        targets,
    }
    .finish_rows(m, net, opts, &by_receiver, &receiver_shift_caps, farm_step_rows, &mut receiver_gate)
}

impl Common {
    #[allow(clippy::too_many_arguments)]
    fn finish_rows(
        self,
        m: &mut Model,
        net: &BeamNetwork,
        opts: &ModelOptions,
        by_receiver: &BTreeMap<(usize, usize), Vec<usize>>,
        shift_caps: &[BTreeMap<i32, f64>],
        farm_steps: Vec<((usize, usize), Vec<usize>)>,
        receiver_gate: &mut impl FnMut(&mut Model, &ReceiverVar, &BTreeMap<i32, f64>),
    ) -> Common {
        let cap = &net.farm_capacity_mw;
        let eps = net.threshold_mw;
        // Farm capacity rows; the choice problem adds its selection term
        // through a later rewrite in `build_choice_model`.
        for ((f, t), vars) in farm_steps {
            if opts.layout == Layout::Sparse && vars.len() < 2 {
                continue;
            }
            m.add_constraint(
                format!("farm_cap_{f}_{t}"),
                vars.iter().map(|&v| (v, 1.0)).collect(),
                Sense::Le,
                cap[f],
            );
        }
        for (rv, ((_, ks), caps)) in self.receivers.iter().zip(by_receiver.iter().zip(shift_caps)) {
            let (i, t) = (rv.flight, rv.t);
            let mut terms = vec![(rv.r, 1.0)];
            terms.extend(
                ks.iter()
                    .map(|&k| &self.power[k])
                    .filter(|pv| pv.coef > 0.0)
                    .map(|pv| (pv.var, -pv.coef)),
            );
            m.add_constraint(format!("recv_{i}_{t}"), terms, Sense::Eq, 0.0);
            receiver_gate(m, rv, caps);
            m.add_constraint(format!("min_recv_{i}_{t}"), vec![(rv.r, 1.0), (rv.b, -eps)], Sense::Ge, 0.0);
            m.add_constraint(
                format!("max_recv_{i}_{t}"),
                vec![(rv.r, 1.0), (rv.b, -rv.big_m)],
                Sense::Le,
                0.0,
            );
        }
        if !self.targets.is_empty() {
            let mut by_target: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
            for pv in self.power.iter().filter(|pv| pv.coef > 0.0) {
                by_target.entry((pv.farm, pv.flight, pv.t)).or_default().push(pv.var);
            }
            let mut per_farm_step: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for &(f, i, t, y) in &self.targets {
                let mut terms: Vec<(usize, f64)> = by_target[&(f, i, t)].iter().map(|&v| (v, 1.0)).collect();
                terms.push((y, -cap[f]));
                m.add_constraint(format!("target_{f}_{i}_{t}"), terms, Sense::Le, 0.0);
                per_farm_step.entry((f, t)).or_default().push(y);
            }
            for ((f, t), ys) in per_farm_step {
                if ys.len() < 2 {
                    continue;
                }
                m.add_constraint(
                    format!("one_target_{f}_{t}"),
                    ys.iter().map(|&y| (y, 1.0)).collect(),
                    Sense::Le,
                    1.0,
                );
            }
        }
        self
    }
}

/// Shift-choice MILP over all flights.
pub fn build_schedule_model(net: &BeamNetwork, opts: &ModelOptions) -> Result<BuiltModel> {
    let flights: Vec<usize> = (0..net.n_flights()).collect();
    schedule_model(net, &flights, opts)
}

pub(crate) fn schedule_model(net: &BeamNetwork, flights: &[usize], opts: &ModelOptions) -> Result<BuiltModel> {
    if net.coverage.shifts.is_none() {
        return Err(Error::InvalidInput("the schedule model needs a coverage set with shifts".into()));
    }
    let shifts = net.coverage.shift_values();
    let mut m = Model::new("schedule");
    let mut shift_vars = Vec::with_capacity(flights.len());
    let mut d_of: HashMap<(usize, i32), usize> = HashMap::new();
    for &i in flights {
        let row: Vec<usize> = shifts
            .iter()
            .map(|&s| {
                let v = m.binary(format!("d_{i}_{}", shift_label(s)));
                d_of.insert((i, s), v);
                v
            })
            .collect();
        m.add_constraint(
            format!("one_shift_{i}"),
            row.iter().map(|&v| (v, 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
        shift_vars.push(row);
    }
    let cap = net.farm_capacity_mw.clone();
    let cov = &net.coverage;
    let common = add_common(
        &mut m,
        net,
        flights,
        &shifts,
        true,
        opts,
        |m, pv, covered| {
            let a = if covered { cap[pv.farm] } else { 0.0 };
            let mut terms = vec![(pv.var, 1.0)];
            if a > 0.0 {
                terms.push((d_of[&(pv.flight, pv.shift)], -a));
            }
            m.add_constraint(
                format!("link_{}_{}_{}_{}", pv.farm, pv.flight, pv.t, shift_label(pv.shift)),
                terms,
                Sense::Le,
                0.0,
            );
        },
        |m, rv, caps| {
            let (i, t) = (rv.flight, rv.t);
            let airborne: Vec<i32> = shifts.iter().copied().filter(|&s| cov.is_airborne(i, t, s)).collect();
            let mut recv_terms = vec![(rv.r, 1.0)];
            recv_terms.extend(
                airborne
                    .iter()
                    .filter_map(|s| caps.get(s).filter(|&&c| c > 0.0).map(|&c| (d_of[&(i, *s)], -c))),
            );
            m.add_constraint(format!("recv_air_{i}_{t}"), recv_terms, Sense::Le, 0.0);
            let mut beam_terms = vec![(rv.b, 1.0)];
            beam_terms.extend(airborne.iter().map(|s| (d_of[&(i, *s)], -1.0)));
            m.add_constraint(format!("beam_air_{i}_{t}"), beam_terms, Sense::Le, 0.0);
        },
    );
    Ok(BuiltModel {
        model: m,
        problem: ProblemKind::Schedule,
        options: *opts,
        flights: flights.to_vec(),
        shift_values: shifts,
        shift_vars,
        farm_vars: Vec::new(),
        flight_vars: Vec::new(),
        power: common.power,
        receivers: common.receivers,
        targets: common.targets,
    })
}

/// Equipment-choice MILP at one penetration level.
pub fn build_choice_model(net: &BeamNetwork, pen: Penetration, opts: &ModelOptions) -> Result<BuiltModel> {
    if net.coverage.shifts.is_some() {
        return Err(Error::InvalidInput("the choice model needs a coverage set without shifts".into()));
    }
    let (nf, ni) = (net.n_farms(), net.n_flights());
    let mut m = Model::new("choice");
    let farm_vars: Vec<usize> = (0..nf).map(|f| m.binary(format!("xfarm_{f}"))).collect();
    let flight_vars: Vec<usize> = (0..ni).map(|i| m.binary(format!("xflt_{i}"))).collect();
    let flights: Vec<usize> = (0..ni).collect();
    let cap = net.farm_capacity_mw.clone();
    let common = add_common(
        &mut m,
        net,
        &flights,
        &[0],
        false,
        opts,
        |m, pv, covered| {
            let a = if covered { cap[pv.farm] } else { 0.0 };
            let mut terms = vec![(pv.var, 1.0)];
            if a > 0.0 {
                terms.push((farm_vars[pv.farm], -a));
            }
            m.add_constraint(format!("link_{}_{}_{}", pv.farm, pv.flight, pv.t), terms, Sense::Le, 0.0);
        },
        |m, rv, _| {
            let (i, t) = (rv.flight, rv.t);
            m.add_constraint(
                format!("recv_sel_{i}_{t}"),
                vec![(rv.r, 1.0), (flight_vars[i], -rv.big_m)],
                Sense::Le,
                0.0,
            );
            m.add_constraint(
                format!("beam_sel_{i}_{t}"),
                vec![(rv.b, 1.0), (flight_vars[i], -1.0)],
                Sense::Le,
                0.0,
            );
        },
    );
    // Farm capacity is conditional on selection in this problem.
    for c in m.constraints.iter_mut().filter(|c| c.name.starts_with("farm_cap_")) {
        let f: usize = c.name["farm_cap_".len()..].split('_').next().unwrap().parse().unwrap();
        c.terms.push((farm_vars[f], -c.rhs));
        c.rhs = 0.0;
    }
    m.add_constraint(
        "farm_count".into(),
        farm_vars.iter().map(|&v| (v, 1.0)).collect(),
        Sense::Eq,
        pen.farm_count(nf) as f64,
    );
    m.add_constraint(
        "flight_count".into(),
        flight_vars.iter().map(|&v| (v, 1.0)).collect(),
        Sense::Eq,
        pen.flight_count(ni) as f64,
    );
    Ok(BuiltModel {
        model: m,
        problem: ProblemKind::Choice(pen),
        options: *opts,
        flights,
        shift_values: vec![0],
        shift_vars: Vec::new(),
        farm_vars,
        flight_vars,
        power: common.power,
        receivers: common.receivers,
        targets: common.targets,
    })
}

fn binary_value(kind: ConstraintKind, name: &str, v: f64) -> std::result::Result<bool, Violation> {
    if (v - v.round()).abs() > BINARY_TOL || !(-BINARY_TOL..=1.0 + BINARY_TOL).contains(&v) {
        return Err(Violation::new(kind, format!("{name} = {v} is not binary")));
    }
    Ok(v > 0.5)
}

impl BuiltModel {
    /// Reads a solution out of model values. With `polish`, received power
    /// is recomputed from the allocations to strip solver round-off.
    pub fn decode(
        &self,
        net: &BeamNetwork,
        values: &[f64],
        status: SolveStatus,
        polish: bool,
    ) -> std::result::Result<Solution, Violation> {
        if values.len() != self.model.vars.len() {
            return Err(Violation::new(
                ConstraintKind::Bounds,
                format!("expected {} values, got {}", self.model.vars.len(), values.len()),
            ));
        }
        let name = |v: usize| self.model.vars[v].name.as_str();
        let mut sol = Solution::empty(net, self.problem, status);
        for (k, &i) in self.flights.iter().enumerate() {
            if let Some(row) = self.shift_vars.get(k) {
                let mut chosen = Vec::new();
                for (j, &v) in row.iter().enumerate() {
                    if binary_value(ConstraintKind::OneShift, name(v), values[v])? {
                        chosen.push(self.shift_values[j]);
                    }
                }
                if chosen.len() != 1 {
                    return Err(Violation::new(
                        ConstraintKind::OneShift,
                        format!("flight {i} has {} shifts selected", chosen.len()),
                    ));
                }
                sol.shifts_chosen[i] = chosen[0];
            }
        }
        for (f, &v) in self.farm_vars.iter().enumerate() {
            if binary_value(ConstraintKind::FarmSelection, name(v), values[v])? {
                sol.selected_farms.push(f);
            }
        }
        for (i, &v) in self.flight_vars.iter().enumerate() {
            if binary_value(ConstraintKind::FlightSelection, name(v), values[v])? {
                sol.selected_flights.push(i);
            }
        }
        for &(_, _, _, y) in &self.targets {
            binary_value(ConstraintKind::SingleTarget, name(y), values[y])?;
        }
        let mut delivered: HashMap<(usize, usize), f64> = HashMap::new();
        for pv in &self.power {
            let p = values[pv.var];
            if p.abs() > VALUE_TOL {
                let p = if polish { p.max(0.0) } else { p };
                sol.allocations.push(Allocation {
                    farm: pv.farm,
                    flight: pv.flight,
                    t: pv.t,
                    shift: pv.shift,
                    power_mw: p,
                    delivered_mw: pv.coef * p,
                });
                *delivered.entry((pv.flight, pv.t)).or_default() += pv.coef * p;
            }
        }
        for rv in &self.receivers {
            let beaming = binary_value(ConstraintKind::ReceiveIndicator, name(rv.b), values[rv.b])?;
            let r = if polish {
                if beaming {
                    delivered.get(&(rv.flight, rv.t)).copied().unwrap_or(0.0)
                } else {
                    0.0
                }
            } else {
                values[rv.r]
            };
            if r.abs() > VALUE_TOL || beaming {
                sol.received.push(Received {
                    flight: rv.flight,
                    t: rv.t,
                    power_mw: r,
                    beaming,
                });
            }
        }
        if polish {
            let live: std::collections::HashSet<(usize, usize)> =
                sol.received.iter().filter(|r| r.beaming).map(|r| (r.flight, r.t)).collect();
            sol.allocations.retain(|a| live.contains(&(a.flight, a.t)));
        }
        sol.allocations.sort_by_key(|a| (a.flight, a.t, a.farm, a.shift));
        sol.received.sort_by_key(|r| (r.flight, r.t));
        Ok(sol.finish(net))
    }

    /// Model values representing `sol`, restricted to this model's flights.
    pub fn encode(&self, sol: &Solution) -> Vec<f64> {
        let mut x: Vec<f64> = self.model.vars.iter().map(|v| v.lower).collect();
        for (k, &i) in self.flights.iter().enumerate() {
            if let Some(row) = self.shift_vars.get(k) {
                let s = sol.shifts_chosen.get(i).copied().unwrap_or(0);
                if let Some(j) = self.shift_values.iter().position(|&v| v == s) {
                    x[row[j]] = 1.0;
                }
            }
        }
        for &f in &sol.selected_farms {
            if let Some(&v) = self.farm_vars.get(f) {
                x[v] = 1.0;
            }
        }
        for &i in &sol.selected_flights {
            if let Some(&v) = self.flight_vars.get(i) {
                x[v] = 1.0;
            }
        }
        let power_of: HashMap<(usize, usize, usize, i32), usize> =
            self.power.iter().map(|pv| ((pv.farm, pv.flight, pv.t, pv.shift), pv.var)).collect();
        let mut targeted: std::collections::HashSet<(usize, usize, usize)> = Default::default();
        for a in &sol.allocations {
            if let Some(&v) = power_of.get(&(a.farm, a.flight, a.t, a.shift)) {
                x[v] = a.power_mw;
                if a.power_mw > 0.0 {
                    targeted.insert((a.farm, a.flight, a.t));
                }
            }
        }
        for &(f, i, t, y) in &self.targets {
            if targeted.contains(&(f, i, t)) {
                x[y] = 1.0;
            }
        }
        let recv_of: HashMap<(usize, usize), &ReceiverVar> =
            self.receivers.iter().map(|rv| ((rv.flight, rv.t), rv)).collect();
        for r in &sol.received {
            if let Some(rv) = recv_of.get(&(r.flight, r.t)) {
                x[rv.r] = r.power_mw;
                x[rv.b] = if r.beaming { 1.0 } else { 0.0 };
            }
        }
        x
    }

    /// Values for a plan that does nothing: shift 0 everywhere and the
    /// lowest-indexed farms and flights selected.
    pub fn idle_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.model.vars.iter().map(|v| v.lower).collect();
        for row in &self.shift_vars {
            let j = self.shift_values.iter().position(|&s| s == 0).unwrap_or(0);
            x[row[j]] = 1.0;
        }
        if let ProblemKind::Choice(pen) = self.problem {
            for &v in self.farm_vars.iter().take(pen.farm_count(self.farm_vars.len())) {
                x[v] = 1.0;
            }
            for &v in self.flight_vars.iter().take(pen.flight_count(self.flight_vars.len())) {
                x[v] = 1.0;
            }
        }
        x
    }
}

fn status_of(s: &MipStatus) -> SolveStatus {
    match s {
        MipStatus::Optimal => SolveStatus::Optimal,
        MipStatus::BoundGap(g) => SolveStatus::BoundGap(*g),
        MipStatus::Infeasible => SolveStatus::Infeasible,
    }
}

/// Groups of flights that never compete for a farm at the same step.
pub(crate) fn flight_components(net: &BeamNetwork) -> Vec<Vec<usize>> {
    let n = net.n_flights();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut has_entries = vec![false; n];
    let mut first_at: HashMap<(u32, u32), usize> = HashMap::new();
    for e in &net.coverage.entries {
        let i = e.flight as usize;
        has_entries[i] = true;
        let j = *first_at.entry((e.farm, e.t)).or_insert(i);
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in (0..n).filter(|&i| has_entries[i]) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

pub(crate) fn solve_schedule_exact(net: &BeamNetwork, exact: &ExactOptions, opts: &ModelOptions) -> Result<Solution> {
    let warm = greedy_schedule(net, opts);
    let parts: Vec<Result<Solution>> = flight_components(net)
        .par_iter()
        .map(|flights| {
            let built = schedule_model(net, flights, opts)?;
            let start = built.encode(&warm);
            let res = solve_exact(&built.model, exact, Some(&start))?;
            if res.status == MipStatus::Infeasible {
                return Err(Error::Infeasible);
            }
            built
                .decode(net, &res.values, status_of(&res.status), true)
                .map_err(Error::Rejected)
        })
        .collect();
    let mut sol = Solution::empty(net, ProblemKind::Schedule, SolveStatus::Optimal);
    for part in parts {
        let part = part?;
        if let SolveStatus::BoundGap(g) = part.status {
            sol.status = match sol.status {
                SolveStatus::BoundGap(h) => SolveStatus::BoundGap(h.max(g)),
                _ => SolveStatus::BoundGap(g),
            };
        }
        for (i, &s) in part.shifts_chosen.iter().enumerate() {
            if s != 0 {
                sol.shifts_chosen[i] = s;
            }
        }
        sol.allocations.extend(part.allocations);
        sol.received.extend(part.received);
    }
    sol.allocations.sort_by_key(|a| (a.flight, a.t, a.farm, a.shift));
    sol.received.sort_by_key(|r| (r.flight, r.t));
    Ok(sol.finish(net))
}

pub(crate) fn solve_choice_exact(
    net: &BeamNetwork,
    pen: Penetration,
    exact: &ExactOptions,
    opts: &ModelOptions,
) -> Result<Solution> {
    let built = build_choice_model(net, pen, opts)?;
    let warm = greedy_choice(net, pen, opts);
    let start = built.encode(&warm);
    let res = solve_exact(&built.model, exact, Some(&start))?;
    if res.status == MipStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    built
        .decode(net, &res.values, status_of(&res.status), true)
        .map_err(Error::Rejected)
}
