//! Dense two-phase bounded-variable primal simplex for the LP relaxations
//! solved inside branch-and-bound.
//!
//! Variables are shifted to their lower bounds and variables fixed by their
//! bounds are dropped; finite upper bounds are handled implicitly, with
//! nonbasic columns resting at either bound. Pivots only touch the nonzero
//! entries of the pivot row. Pricing uses Dantzig's rule; on long degenerate
//! runs the entering column is drawn at random (from a fixed seed) among the
//! improving ones, which escapes cycles while staying reproducible.

use super::model::{Model, Sense};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_SWITCH: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows x cols`, the current `B^-1 A`.
    a: Vec<f64>,
    rows: usize,
    cols: usize,
    /// Value of the basic variable of each row.
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    is_basic: Vec<bool>,
    /// Nonbasic columns resting at their upper bound.
    at_upper: Vec<bool>,
    /// Columns barred from entering (artificials after phase one).
    barred: Vec<bool>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize, reduced: &mut [f64]) {
        let w = self.cols;
        let inv = 1.0 / self.a[pr * w + pc];
        let mut nz: Vec<(usize, f64)> = Vec::new();
        for (c, v) in self.a[pr * w..(pr + 1) * w].iter_mut().enumerate() {
            if *v == 0.0 {
                continue;
            }
            *v *= inv;
            if v.abs() < DROP_TOL {
                *v = 0.0;
            } else if c != pc {
                nz.push((c, *v));
            }
        }
        self.a[pr * w + pc] = 1.0;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[r * w..(r + 1) * w];
            for &(c, p) in &nz {
                let x = row[c] - f * p;
                row[c] = if x.abs() < DROP_TOL { 0.0 } else { x };
            }
            row[pc] = 0.0;
        }
        let f = reduced[pc];
        if f != 0.0 {
            for &(c, p) in &nz {
                reduced[c] -= f * p;
            }
            reduced[pc] = 0.0;
        }
        self.is_basic[self.basis[pr]] = false;
        self.is_basic[pc] = true;
        self.basis[pr] = pc;
    }

    /// Reduced costs for maximizing `c`.
    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let w = self.cols;
        let mut d = c[..w].to_vec();
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for (x, a) in d.iter_mut().zip(&self.a[r * w..(r + 1) * w]) {
                *x -= cb * a;
            }
        }
        d
    }

    /// Maximizes `c`; returns `false` when unbounded.
    fn optimize(&mut self, c: &[f64], max_iter: usize) -> Result<bool> {
        let mut d = self.reduced_costs(c);
        let mut stall = 0usize;
        let mut rng = 0x9e37_79b9_7f4a_7c15u64 ^ (self.rows as u64) << 20 ^ self.cols as u64;
        for _ in 0..max_iter {
            // On a degenerate run, pick uniformly among improving columns
            // (deterministic xorshift) to break cycles.
            let random = stall >= DEGENERATE_SWITCH;
            let mut enter: Option<(usize, f64)> = None;
            let mut best = OPT_TOL;
            let mut seen = 0u64;
            for j in 0..self.cols {
                if self.is_basic[j] || self.barred[j] {
                    continue;
                }
                let (score, dir) = if self.at_upper[j] { (-d[j], -1.0) } else { (d[j], 1.0) };
                if score <= OPT_TOL {
                    continue;
                }
                if random {
                    seen += 1;
                    if next_random(&mut rng) % seen == 0 {
                        enter = Some((j, dir));
                    }
                } else if score > best {
                    best = score;
                    enter = Some((j, dir));
                }
            }
            let Some((pc, dir)) = enter else {
                return Ok(true);
            };

            // Harris two-pass ratio test: the first pass finds the longest
            // step allowed with bounds relaxed by FEAS_TOL, the second takes
            // the largest pivot among rows blocking within that step.
            let limit = |r: usize| -> Option<(f64, f64, bool)> {
                let alpha = dir * self.at(r, pc);
                let b = self.basis[r];
                if alpha > PIVOT_TOL {
                    Some((self.beta[r], alpha, false))
                } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                    Some((self.upper[b] - self.beta[r], -alpha, true))
                } else {
                    None
                }
            };
            let mut relaxed = f64::INFINITY;
            for r in 0..self.rows {
                if let Some((dist, alpha, _)) = limit(r) {
                    relaxed = relaxed.min((dist.max(0.0) + FEAS_TOL) / alpha);
                }
            }
            let mut theta = self.upper[pc];
            let mut leave: Option<(usize, bool)> = None;
            if theta > relaxed {
                let mut best_alpha = 0.0;
                for r in 0..self.rows {
                    let Some((dist, alpha, to_upper)) = limit(r) else {
                        continue;
                    };
                    if dist.max(0.0) / alpha <= relaxed && alpha > best_alpha {
                        best_alpha = alpha;
                        leave = Some((r, to_upper));
                        theta = dist.max(0.0) / alpha;
                    }
                }
            }
            if theta.is_infinite() {
                return Ok(false);
            }
            if theta > 1e-12 {
                stall = 0;
            } else {
                stall += 1;
            }
            let step = dir * theta;
            if step != 0.0 {
                for r in 0..self.rows {
                    let a = self.a[r * self.cols + pc];
                    if a != 0.0 {
                        self.beta[r] -= a * step;
                    }
                }
            }
            match leave {
                None => self.at_upper[pc] = !self.at_upper[pc],
                Some((pr, to_upper)) => {
                    let entering = self.nonbasic_value(pc) + step;
                    let out = self.basis[pr];
                    self.pivot(pr, pc, &mut d);
                    self.at_upper[out] = to_upper;
                    self.at_upper[pc] = false;
                    self.beta[pr] = entering;
                }
            }
        }
        Err(Error::IterationLimit)
    }
}

fn next_random(state: &mut u64) -> u64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    *state
}

/// Solves the LP relaxation of `model` under the given bounds.
pub fn solve_lp(model: &Model, lower: &[f64], upper: &[f64]) -> Result<LpOutcome> {
    let n = model.vars.len();
    for j in 0..n {
        if upper[j] < lower[j] - FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
    }
    // Free columns after dropping the fixed ones.
    let mut col_of = vec![usize::MAX; n];
    let mut active = Vec::new();
    for j in 0..n {
        if upper[j] - lower[j] > FEAS_TOL {
            col_of[j] = active.len();
            active.push(j);
        }
    }
    let na = active.len();

    struct Row {
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let mut rhs = c.rhs;
        let mut dense: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
        for &(j, a) in &c.terms {
            rhs -= a * lower[j];
            if col_of[j] != usize::MAX && a != 0.0 {
                dense.push((col_of[j], a));
            }
        }
        dense.sort_by_key(|t| t.0);
        dense.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        if dense.is_empty() {
            let ok = match c.sense {
                Sense::Le => rhs >= -FEAS_TOL * (1.0 + c.rhs.abs()),
                Sense::Ge => rhs <= FEAS_TOL * (1.0 + c.rhs.abs()),
                Sense::Eq => rhs.abs() <= FEAS_TOL * (1.0 + c.rhs.abs()),
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        let mut sense = c.sense;
        if rhs < 0.0 {
            rhs = -rhs;
            for t in &mut dense {
                t.1 = -t.1;
            }
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push(Row {
            terms: dense,
            sense,
            rhs,
        });
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.sense != Sense::Le).count();
    let cols = na + n_slack + n_art;
    let mut col_upper = vec![f64::INFINITY; cols];
    for (k, &j) in active.iter().enumerate() {
        col_upper[k] = upper[j] - lower[j];
    }
    let mut t = Tableau {
        a: vec![0.0; m * cols],
        rows: m,
        cols,
        beta: rows.iter().map(|r| r.rhs).collect(),
        basis: vec![0; m],
        upper: col_upper,
        is_basic: vec![false; cols],
        at_upper: vec![false; cols],
        barred: vec![false; cols],
    };
    let (mut next_slack, mut next_art) = (na, na + n_slack);
    for (i, r) in rows.iter().enumerate() {
        for &(k, a) in &r.terms {
            t.a[i * cols + k] = a;
        }
        let basic = match r.sense {
            Sense::Le => {
                t.a[i * cols + next_slack] = 1.0;
                next_slack += 1;
                next_slack - 1
            }
            Sense::Ge => {
                t.a[i * cols + next_slack] = -1.0;
                next_slack += 1;
                t.a[i * cols + next_art] = 1.0;
                next_art += 1;
                next_art - 1
            }
            Sense::Eq => {
                t.a[i * cols + next_art] = 1.0;
                next_art += 1;
                next_art - 1
            }
        };
        t.basis[i] = basic;
        t.is_basic[basic] = true;
    }
    let max_iter = 50_000 + 50 * (m + cols);
    let art_start = na + n_slack;

    if n_art > 0 {
        let mut c1 = vec![0.0; cols];
        for v in &mut c1[art_start..] {
            *v = -1.0;
        }
        t.optimize(&c1, max_iter)?;
        let infeas: f64 = (0..m).filter(|&r| t.basis[r] >= art_start).map(|r| t.beta[r]).sum();
        let scale = 1.0 + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are redundant and are dropped.
        let mut dummy = vec![0.0; cols];
        let mut keep = vec![true; m];
        for r in 0..m {
            if t.basis[r] < art_start {
                continue;
            }
            let pc = (0..art_start)
                .filter(|&j| !t.is_basic[j] && t.at(r, j).abs() > PIVOT_TOL)
                .max_by(|&a, &b| t.at(r, a).abs().total_cmp(&t.at(r, b).abs()));
            match pc {
                Some(pc) => {
                    let value = t.nonbasic_value(pc);
                    t.pivot(r, pc, &mut dummy);
                    t.at_upper[pc] = false;
                    t.beta[r] = value;
                }
                None => keep[r] = false,
            }
        }
        if keep.iter().any(|k| !k) {
            let mut a = Vec::with_capacity(t.a.len());
            let (mut basis, mut beta) = (Vec::new(), Vec::new());
            for r in 0..m {
                if keep[r] {
                    a.extend_from_slice(&t.a[r * cols..(r + 1) * cols]);
                    basis.push(t.basis[r]);
                    beta.push(t.beta[r]);
                } else {
                    t.is_basic[t.basis[r]] = false;
                }
            }
            t.rows = basis.len();
            t.a = a;
            t.basis = basis;
            t.beta = beta;
        }
        for b in &mut t.barred[art_start..] {
            *b = true;
        }
    }

    let mut c2 = vec![0.0; cols];
    for (k, &j) in active.iter().enumerate() {
        c2[k] = model.vars[j].objective;
    }
    if !t.optimize(&c2, max_iter)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut values = lower.to_vec();
    for (k, &j) in active.iter().enumerate() {
        if !t.is_basic[k] {
            values[j] += t.nonbasic_value(k);
        }
    }
    for r in 0..t.rows {
        let b = t.basis[r];
        if b < na {
            values[active[b]] += t.beta[r].max(0.0);
        }
    }
    for j in 0..n {
        values[j] = values[j].clamp(lower[j], upper[j].max(lower[j]));
    }
    Ok(LpOutcome::Optimal {
        objective: model.objective_value(&values),
        values,
    })
}

/// LP relaxation with the model's own bounds.
pub fn solve_relaxation(model: &Model) -> Result<LpOutcome> {
    let lower: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
    solve_lp(model, &lower, &upper)
}
