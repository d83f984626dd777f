//! Exact-rational two-phase simplex with Bland's rule, for tiny LPs.
//!
//! `maximize c.x  s.t.  A x <= b, x >= 0`. Slow and exact; it exists so
//! optimizer results can be compared against something free of tolerances.

use num::{BigRational, One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite")
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

pub struct RationalLp {
    cost: Vec<Q>,
    rows: Vec<(Vec<Q>, Q)>,
}

struct Tableau {
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.t[0].len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = &*v / &p;
        }
        let row = self.t[r].clone();
        for (i, other) in self.t.iter_mut().enumerate() {
            if i == r || other[c].is_zero() {
                continue;
            }
            let f = other[c].clone();
            for (v, pr) in other.iter_mut().zip(&row) {
                if !pr.is_zero() {
                    *v = &*v - &f * pr;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for `cost`; last entry is the objective value.
    fn reduced(&self, cost: &[Q]) -> Vec<Q> {
        let w = self.width();
        (0..=w)
            .map(|j| {
                let mut s = Q::zero();
                for (i, row) in self.t.iter().enumerate() {
                    s += &cost[self.basis[i]] * &row[j];
                }
                if j < w {
                    s - &cost[j]
                } else {
                    s
                }
            })
            .collect()
    }

    /// Maximizes `cost` over columns `allowed`; `false` if unbounded.
    fn run(&mut self, cost: &[Q], allowed: usize) -> bool {
        let w = self.width();
        loop {
            let d = self.reduced(cost);
            let Some(c) = (0..allowed).find(|&j| d[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[w] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

impl RationalLp {
    pub fn new(cost: Vec<Q>) -> Self {
        RationalLp { cost, rows: Vec::new() }
    }

    pub fn le(&mut self, row: Vec<Q>, rhs: Q) {
        assert_eq!(row.len(), self.cost.len());
        self.rows.push((row, rhs));
    }

    pub fn maximize(&self) -> LpResult {
        let n = self.cost.len();
        let m = self.rows.len();
        if m == 0 {
            return if self.cost.iter().any(|c| c.is_positive()) {
                LpResult::Unbounded
            } else {
                LpResult::Optimal(0.0)
            };
        }
        let negative: Vec<usize> = (0..m).filter(|&i| self.rows[i].1.is_negative()).collect();
        let n_real = n + m;
        let width = n_real + negative.len();
        let mut t = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (i, (a, b)) in self.rows.iter().enumerate() {
            let mut row = vec![Q::zero(); width + 1];
            let flip = b.is_negative();
            for (j, v) in a.iter().enumerate() {
                row[j] = if flip { -v.clone() } else { v.clone() };
            }
            row[n + i] = if flip { -Q::one() } else { Q::one() };
            row[width] = if flip { -b.clone() } else { b.clone() };
            if flip {
                let k = n_real + negative.iter().position(|&x| x == i).unwrap();
                row[k] = Q::one();
                basis.push(k);
            } else {
                basis.push(n + i);
            }
            t.push(row);
        }
        let mut tab = Tableau { t, basis };

        if !negative.is_empty() {
            let phase1: Vec<Q> = (0..width)
                .map(|j| if j >= n_real { -Q::one() } else { Q::zero() })
                .collect();
            tab.run(&phase1, width);
            if tab.reduced(&phase1)[width].is_negative() {
                return LpResult::Infeasible;
            }
            let mut r = 0;
            while r < tab.t.len() {
                if tab.basis[r] >= n_real {
                    match (0..n_real).find(|&j| !tab.t[r][j].is_zero()) {
                        Some(c) => tab.pivot(r, c),
                        None => {
                            tab.t.remove(r);
                            tab.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
            if tab.t.is_empty() {
                return LpResult::Optimal(0.0);
            }
        }

        let mut cost: Vec<Q> = self.cost.clone();
        cost.resize(width, Q::zero());
        if !tab.run(&cost, n_real) {
            return LpResult::Unbounded;
        }
        LpResult::Optimal(tab.reduced(&cost)[width].to_f64().unwrap())
    }
}
