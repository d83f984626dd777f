//! Capacity-aware greedy plans for both problems. They scale to large
//! networks, are always feasible, and seed branch-and-bound.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{Allocation, BeamNetwork, ModelOptions, Penetration, ProblemKind, Received, Solution, SolveStatus};
use crate::coverage::CoverageEntry;

/// Fills one flight at one step from the farms that can reach it, best
/// transfer coefficient first. Returns the received power and the per-farm
/// allocations, or nothing if the threshold is not met.
fn fill_receiver(
    candidates: &[&CoverageEntry],
    remaining: &HashMap<usize, f64>,
    capacity: &[f64],
    eps: f64,
    cruise_cap: Option<f64>,
) -> Option<(f64, Vec<(usize, f64, f64)>)> {
    let mut order: Vec<&&CoverageEntry> = candidates.iter().collect();
    order.sort_by(|a, b| b.coef.total_cmp(&a.coef).then(a.farm.cmp(&b.farm)));
    let mut r = 0.0;
    let mut out = Vec::new();
    for e in order {
        let f = e.farm as usize;
        let mut p = remaining.get(&f).copied().unwrap_or(capacity[f]);
        if p <= 0.0 {
            continue;
        }
        if let Some(c) = cruise_cap {
            if r >= c {
                break;
            }
            p = p.min((c - r) / e.coef);
        }
        r += e.coef * p;
        out.push((f, p, e.coef * p));
    }
    (r >= eps).then_some((r, out))
}

struct Plan {
    value: f64,
    steps: Vec<(usize, f64, Vec<(usize, f64, f64)>)>,
}

/// Per-flight best shift under sequential, capacity-aware allocation.
/// Flights are processed in flight-id order; ties between shifts favour
/// zero, then the smallest displacement, earlier first.
pub fn greedy_schedule(net: &BeamNetwork, opts: &ModelOptions) -> Solution {
    let mut sol = Solution::empty(net, ProblemKind::Schedule, SolveStatus::Heuristic);
    if net.objective_per_mw_step() <= 0.0 || net.coverage.shifts.is_none() {
        return sol.finish(net);
    }
    let cap = &net.farm_capacity_mw;
    let mut shifts = net.coverage.shift_values();
    shifts.sort_by_key(|&s| (s.abs(), s));

    let mut per_flight: Vec<Vec<&CoverageEntry>> = vec![Vec::new(); net.n_flights()];
    for e in &net.coverage.entries {
        per_flight[e.flight as usize].push(e);
    }
    let mut order: Vec<usize> = (0..net.n_flights()).collect();
    order.sort_by(|&a, &b| net.flight_ids[a].cmp(&net.flight_ids[b]).then(a.cmp(&b)));

    // remaining[(farm, t)]; absent means untouched.
    let mut remaining: HashMap<(usize, usize), f64> = HashMap::new();
    for i in order {
        if per_flight[i].is_empty() {
            continue;
        }
        let mut best: Option<(i32, Plan)> = None;
        for &s in &shifts {
            let mut by_step: BTreeMap<usize, Vec<&CoverageEntry>> = BTreeMap::new();
            for e in per_flight[i].iter().filter(|e| e.shift as i32 == s) {
                by_step.entry(e.t as usize).or_default().push(e);
            }
            let mut plan = Plan {
                value: 0.0,
                steps: Vec::new(),
            };
            for (t, cands) in by_step {
                let rem: HashMap<usize, f64> = cands
                    .iter()
                    .map(|e| {
                        let f = e.farm as usize;
                        (f, remaining.get(&(f, t)).copied().unwrap_or(cap[f]))
                    })
                    .collect();
                if let Some((r, alloc)) = fill_receiver(&cands, &rem, cap, net.threshold_mw, opts.cruise_cap_mw) {
                    plan.value += r;
                    plan.steps.push((t, r, alloc));
                }
            }
            if best.as_ref().is_none_or(|(_, b)| plan.value > b.value * (1.0 + 1e-12) + 1e-12) {
                best = Some((s, plan));
            }
        }
        let Some((s, plan)) = best else { continue };
        sol.shifts_chosen[i] = s;
        for (t, r, alloc) in plan.steps {
            for (f, p, delivered) in alloc {
                let left = remaining.entry((f, t)).or_insert(cap[f]);
                *left = if opts.single_target_per_farm { 0.0 } else { (*left - p).max(0.0) };
                sol.allocations.push(Allocation {
                    farm: f,
                    flight: i,
                    t,
                    shift: s,
                    power_mw: p,
                    delivered_mw: delivered,
                });
            }
            sol.received.push(Received {
                flight: i,
                t,
                power_mw: r,
                beaming: true,
            });
        }
    }
    sol.allocations.sort_by_key(|a| (a.flight, a.t, a.farm, a.shift));
    sol.received.sort_by_key(|r| (r.flight, r.t));
    sol.finish(net)
}

fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Equips the farms and flights with the highest capacity-weighted
/// coverage, then allocates each step by descending transfer coefficient,
/// dropping receivers that stay below the threshold.
pub fn greedy_choice(net: &BeamNetwork, pen: Penetration, opts: &ModelOptions) -> Solution {
    let mut sol = Solution::empty(net, ProblemKind::Choice(pen), SolveStatus::Heuristic);
    let cap = &net.farm_capacity_mw;
    let mut farm_score = vec![0.0; net.n_farms()];
    let mut flight_score = vec![0.0; net.n_flights()];
    for e in &net.coverage.entries {
        let w = e.coef * cap[e.farm as usize];
        farm_score[e.farm as usize] += w;
        flight_score[e.flight as usize] += w;
    }
    sol.selected_farms = top_k(&farm_score, pen.farm_count(net.n_farms()));
    sol.selected_flights = top_k(&flight_score, pen.flight_count(net.n_flights()));
    if net.objective_per_mw_step() <= 0.0 {
        return sol.finish(net);
    }
    let farm_on: HashSet<usize> = sol.selected_farms.iter().copied().collect();
    let flight_on: HashSet<usize> = sol.selected_flights.iter().copied().collect();

    let mut by_step: BTreeMap<usize, Vec<&CoverageEntry>> = BTreeMap::new();
    for e in net
        .coverage
        .entries
        .iter()
        .filter(|e| farm_on.contains(&(e.farm as usize)) && flight_on.contains(&(e.flight as usize)))
    {
        by_step.entry(e.t as usize).or_default().push(e);
    }
    for (t, mut cands) in by_step {
        cands.sort_by(|a, b| b.coef.total_cmp(&a.coef).then(a.flight.cmp(&b.flight)).then(a.farm.cmp(&b.farm)));
        let mut dropped: HashSet<u32> = HashSet::new();
        loop {
            let mut remaining: HashMap<usize, f64> = HashMap::new();
            let mut received: BTreeMap<usize, f64> = BTreeMap::new();
            let mut alloc: Vec<(usize, usize, f64, f64)> = Vec::new();
            for e in cands.iter().filter(|e| !dropped.contains(&e.flight)) {
                let (f, i) = (e.farm as usize, e.flight as usize);
                let left = remaining.entry(f).or_insert(cap[f]);
                let r = received.entry(i).or_default();
                let mut p = *left;
                if let Some(c) = opts.cruise_cap_mw {
                    p = p.min(((c - *r) / e.coef).max(0.0));
                }
                if p <= 0.0 {
                    continue;
                }
                *left = if opts.single_target_per_farm { 0.0 } else { *left - p };
                *r += e.coef * p;
                alloc.push((f, i, p, e.coef * p));
            }
            let weak: Vec<usize> = received
                .iter()
                .filter(|(_, &r)| r > 0.0 && r < net.threshold_mw)
                .map(|(&i, _)| i)
                .collect();
            if weak.is_empty() {
                for (f, i, p, d) in alloc {
                    sol.allocations.push(Allocation {
                        farm: f,
                        flight: i,
                        t,
                        shift: 0,
                        power_mw: p,
                        delivered_mw: d,
                    });
                }
                for (i, r) in received.into_iter().filter(|(_, r)| *r > 0.0) {
                    sol.received.push(Received {
                        flight: i,
                        t,
                        power_mw: r,
                        beaming: true,
                    });
                }
                break;
            }
            dropped.extend(weak.into_iter().map(|i| i as u32));
        }
    }
    sol.allocations.sort_by_key(|a| (a.flight, a.t, a.farm, a.shift));
    sol.received.sort_by_key(|r| (r.flight, r.t));
    sol.finish(net)
}
