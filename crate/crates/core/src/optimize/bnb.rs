//! Best-first branch-and-bound over the binary variables of a [`Model`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::model::{Model, VarKind};
use super::simplex::{solve_lp, LpOutcome};
use crate::error::{Error, Result};

const INTEGRALITY_TOL: f64 = 1e-6;
const START_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExactOptions {
    /// Relative optimality gap at which a node is pruned.
    pub gap_tol: f64,
    /// Wall-clock limit in seconds; `None` runs to optimality.
    pub time_limit_s: Option<f64>,
    /// Largest model (in variables) the exact solver accepts.
    pub size_cap: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            gap_tol: 1e-7,
            time_limit_s: None,
            size_cap: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MipStatus {
    Optimal,
    /// Stopped early; relative gap between the best bound and incumbent.
    BoundGap(f64),
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub status: MipStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Best bound proven at termination.
    pub bound: f64,
    pub nodes: usize,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Highest bound first, then deeper nodes, then older nodes.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

fn most_fractional(model: &Model, values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in model.vars.iter().enumerate() {
        if v.kind != VarKind::Binary {
            continue;
        }
        let frac = (values[j] - values[j].floor()).min(values[j].ceil() - values[j]);
        if frac > INTEGRALITY_TOL && best.is_none_or(|(_, f)| frac > f + 1e-12) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

fn rounded(model: &Model, mut values: Vec<f64>) -> Vec<f64> {
    for (v, x) in model.vars.iter().zip(values.iter_mut()) {
        if v.kind == VarKind::Binary {
            *x = x.round();
        }
    }
    values
}

/// Maximizes `model` exactly. `start` is an optional feasible assignment
/// used as the first incumbent; it is ignored if it violates the model.
pub fn solve_exact(model: &Model, opts: &ExactOptions, start: Option<&[f64]>) -> Result<MipResult> {
    if model.vars.len() > opts.size_cap {
        return Err(Error::SizeCap {
            vars: model.vars.len(),
            cap: opts.size_cap,
        });
    }
    let deadline = opts.time_limit_s.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
    let mut incumbent: Option<(f64, Vec<f64>)> = start
        .filter(|x| x.len() == model.vars.len() && model.max_violation(x).0 <= START_TOL)
        .map(|x| (model.objective_value(x), x.to_vec()));

    let lower: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    let mut nodes = 0usize;

    let mut evaluate = |lower: Vec<f64>, upper: Vec<f64>, depth: usize| -> Result<Option<Node>> {
        nodes += 1;
        match solve_lp(model, &lower, &upper)? {
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Unbounded),
            LpOutcome::Optimal { objective, values } => {
                next_id += 1;
                Ok(Some(Node {
                    bound: objective,
                    depth,
                    id: next_id,
                    lower,
                    upper,
                    values,
                }))
            }
        }
    };

    let prune_level = |inc: &Option<(f64, Vec<f64>)>| -> f64 {
        match inc {
            Some((z, _)) => z + (opts.gap_tol * z.abs()).max(1e-9),
            None => f64::NEG_INFINITY,
        }
    };

    let mut root_bound = f64::NEG_INFINITY;
    if let Some(root) = evaluate(lower, upper, 0)? {
        root_bound = root.bound;
        heap.push(root);
    } else if incumbent.is_none() {
        return Ok(MipResult {
            status: MipStatus::Infeasible,
            objective: f64::NEG_INFINITY,
            values: Vec::new(),
            bound: f64::NEG_INFINITY,
            nodes,
        });
    }

    let mut timed_out = false;
    while let Some(node) = heap.pop() {
        if node.bound <= prune_level(&incumbent) {
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            heap.push(node);
            timed_out = true;
            break;
        }
        let Some(j) = most_fractional(model, &node.values) else {
            let values = rounded(model, node.values);
            let z = model.objective_value(&values);
            if incumbent.as_ref().is_none_or(|(best, _)| z > *best) {
                incumbent = Some((z, values));
            }
            continue;
        };
        for fix in [1.0, 0.0] {
            let (mut lo, mut hi) = (node.lower.clone(), node.upper.clone());
            lo[j] = fix;
            hi[j] = fix;
            let Some(child) = evaluate(lo, hi, node.depth + 1)? else {
                continue;
            };
            if child.bound <= prune_level(&incumbent) {
                continue;
            }
            if most_fractional(model, &child.values).is_none() {
                let values = rounded(model, child.values);
                let z = model.objective_value(&values);
                if incumbent.as_ref().is_none_or(|(best, _)| z > *best) {
                    incumbent = Some((z, values));
                }
            } else {
                heap.push(child);
            }
        }
    }

    let Some((objective, values)) = incumbent else {
        return Ok(MipResult {
            status: if timed_out {
                MipStatus::BoundGap(f64::INFINITY)
            } else {
                MipStatus::Infeasible
            },
            objective: f64::NEG_INFINITY,
            values: Vec::new(),
            bound: root_bound,
            nodes,
        });
    };
    let open_bound = heap.iter().map(|n| n.bound).fold(f64::NEG_INFINITY, f64::max);
    let (status, bound) = if timed_out && open_bound > prune_level(&Some((objective, Vec::new()))) {
        let gap = (open_bound - objective) / objective.abs().max(1e-9);
        (MipStatus::BoundGap(gap), open_bound)
    } else {
        (MipStatus::Optimal, objective)
    };
    Ok(MipResult {
        status,
        objective,
        values,
        bound,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::model::Sense;

    fn knapsack(values: &[f64], weights: &[f64], capacity: f64) -> Model {
        let mut m = Model::new("knapsack");
        let vars: Vec<usize> = values
            .iter()
            .enumerate()
            .map(|(k, &v)| m.add_var(format!("x{k}"), VarKind::Binary, 0.0, 1.0, v))
            .collect();
        m.add_constraint(
            "cap".into(),
            vars.iter().zip(weights).map(|(&j, &w)| (j, w)).collect(),
            Sense::Le,
            capacity,
        );
        m
    }

    fn brute_force(values: &[f64], weights: &[f64], capacity: f64) -> f64 {
        (0u32..1 << values.len())
            .filter(|mask| (0..values.len()).filter(|k| mask >> k & 1 == 1).map(|k| weights[k]).sum::<f64>() <= capacity)
            .map(|mask| (0..values.len()).filter(|k| mask >> k & 1 == 1).map(|k| values[k]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    #[test]
    fn knapsack_matches_brute_force() {
        let values = [10.0, 13.0, 7.0, 8.0, 2.5, 9.0, 4.0];
        let weights = [5.0, 7.0, 3.0, 4.0, 1.0, 6.0, 2.0];
        for cap in [0.0, 4.0, 9.5, 13.0, 20.0, 40.0] {
            let m = knapsack(&values, &weights, cap);
            let r = solve_exact(&m, &ExactOptions::default(), None).unwrap();
            assert_eq!(r.status, MipStatus::Optimal);
            assert!((r.objective - brute_force(&values, &weights, cap)).abs() < 1e-9, "cap {cap}");
        }
    }

    #[test]
    fn size_cap_refuses() {
        let m = knapsack(&[1.0; 6], &[1.0; 6], 3.0);
        let opts = ExactOptions {
            size_cap: 5,
            ..ExactOptions::default()
        };
        assert!(matches!(solve_exact(&m, &opts, None), Err(Error::SizeCap { vars: 6, cap: 5 })));
    }

    #[test]
    fn infeasible_model_reported() {
        let mut m = knapsack(&[1.0, 1.0], &[1.0, 1.0], 1.0);
        m.add_constraint("both".into(), vec![(0, 1.0), (1, 1.0)], Sense::Eq, 2.0);
        let r = solve_exact(&m, &ExactOptions::default(), None).unwrap();
        assert_eq!(r.status, MipStatus::Infeasible);
    }

    #[test]
    fn bad_start_is_ignored() {
        let m = knapsack(&[3.0, 4.0], &[1.0, 1.0], 1.0);
        let r = solve_exact(&m, &ExactOptions::default(), Some(&[1.0, 1.0])).unwrap();
        assert!((r.objective - 4.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_repeat() {
        let m = knapsack(&[5.0, 5.0, 5.0, 5.0], &[2.0, 2.0, 2.0, 2.0], 5.0);
        let a = solve_exact(&m, &ExactOptions::default(), None).unwrap();
        let b = solve_exact(&m, &ExactOptions::default(), None).unwrap();
        assert_eq!(a, b);
    }
}
