//! A small algebraic MILP container: bounded variables, linear rows, and a
//! linear objective to maximize.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize sum(objective_j * x_j)` subject to the rows and bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64, objective: f64) -> usize {
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
            objective,
        });
        self.vars.len() - 1
    }

    pub fn binary(&mut self, name: String) -> usize {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, 0.0)
    }

    pub fn continuous(&mut self, name: String, objective: f64) -> usize {
        self.add_var(name, VarKind::Continuous, 0.0, f64::INFINITY, objective)
    }

    pub fn add_constraint(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Largest bound or row violation of `values` (0 when feasible), and the
    /// name of the offending row or variable. Row violations are scaled by
    /// `1 + |rhs|`.
    pub fn max_violation(&self, values: &[f64]) -> (f64, Option<String>) {
        let mut worst = 0.0;
        let mut at: Option<String> = None;
        let mut note = |v: f64, name: &str| {
            if v > worst {
                worst = v;
                at = Some(name.to_owned());
            }
        };
        for (var, &x) in self.vars.iter().zip(values) {
            note(var.lower - x, &var.name);
            note(x - var.upper, &var.name);
            if var.kind == VarKind::Binary {
                note((x - x.round()).abs(), &var.name);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * values[j]).sum();
            let v = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            note(v / (1.0 + c.rhs.abs()), &c.name);
        }
        (worst, at)
    }
}
