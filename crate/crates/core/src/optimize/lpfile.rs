//! LP-text and free-MPS export, and `name value` solution files for
//! round trips through external solvers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::build::BuiltModel;
use super::model::{Model, Sense, VarKind};
use super::{BeamNetwork, Solution, SolveStatus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFormat {
    #[default]
    Lp,
    Mps,
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], model: &Model) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % 6 == 0 {
            out.push_str("\n  ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {} {}", num(a.abs()), model.vars[j].name);
        } else {
            let _ = write!(out, " {sign} {} {}", num(a.abs()), model.vars[j].name);
        }
    }
}

/// CPLEX-style LP text.
pub fn write_lp(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str("Maximize\n obj:");
    let obj: Vec<(usize, f64)> = model
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(j, v)| (j, v.objective))
        .collect();
    write_terms(&mut out, &obj, model);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, &c.terms, model);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        match v.kind {
            VarKind::Binary if v.lower == 0.0 && v.upper == 1.0 => {}
            _ if v.lower == v.upper => {
                let _ = writeln!(out, " {} = {}", v.name, num(v.lower));
            }
            VarKind::Continuous if v.lower == 0.0 && v.upper == f64::INFINITY => {
                let _ = writeln!(out, " {} >= 0", v.name);
            }
            _ => {
                let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
            }
        }
    }
    let binaries: Vec<&str> = model
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

/// Free-format MPS with an explicit maximization sense.
pub fn write_mps(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", model.name);
    out.push_str("OBJSENSE\n    MAX\nROWS\n N obj\n");
    for c in &model.constraints {
        let s = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {s} {}", c.name);
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (r, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.terms {
            columns[j].push((r, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in model.vars.iter().enumerate() {
        let is_int = v.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, " MARKER{marker} 'MARKER' '{tag}'");
            marker += 1;
            in_int = is_int;
        }
        let mut wrote = false;
        if v.objective != 0.0 {
            let _ = writeln!(out, " {} obj {}", v.name, num(v.objective));
            wrote = true;
        }
        for &(r, a) in &columns[j] {
            if a != 0.0 {
                let _ = writeln!(out, " {} {} {}", v.name, model.constraints[r].name, num(a));
                wrote = true;
            }
        }
        if !wrote {
            let _ = writeln!(out, " {} obj 0", v.name);
        }
    }
    if in_int {
        let _ = writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'");
    }
    out.push_str("RHS\n");
    for c in model.constraints.iter().filter(|c| c.rhs != 0.0) {
        let _ = writeln!(out, " rhs {} {}", c.name, num(c.rhs));
    }
    out.push_str("BOUNDS\n");
    for v in &model.vars {
        if v.lower == v.upper {
            let _ = writeln!(out, " FX bnd {} {}", v.name, num(v.lower));
            continue;
        }
        if v.lower != 0.0 {
            let _ = writeln!(out, " LO bnd {} {}", v.name, num(v.lower));
        }
        if v.upper.is_finite() {
            let _ = writeln!(out, " UP bnd {} {}", v.name, num(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn export_model(model: &Model, path: &Path, format: ModelFormat) -> Result<()> {
    let text = match format {
        ModelFormat::Lp => write_lp(model),
        ModelFormat::Mps => write_mps(model),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One `name value` line per variable.
pub fn write_values(model: &Model, values: &[f64]) -> String {
    let mut out = String::new();
    for (v, x) in model.vars.iter().zip(values) {
        let _ = writeln!(out, "{} {}", v.name, x);
    }
    out
}

/// Parses `name value` lines into a full value vector; variables not
/// mentioned are zero. Blank lines and `#` comments are skipped.
pub fn read_values(model: &Model, text: &str, origin: &Path) -> Result<Vec<f64>> {
    let index: HashMap<&str, usize> = model.vars.iter().enumerate().map(|(j, v)| (v.name.as_str(), j)).collect();
    let mut values = vec![0.0; model.vars.len()];
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format(origin, format!("line {}: expected `name value`", n + 1)));
        };
        let j = *index.get(name).ok_or_else(|| Error::UnknownVariable(name.to_owned()))?;
        values[j] = value
            .parse()
            .map_err(|_| Error::format(origin, format!("line {}: bad number `{value}`", n + 1)))?;
    }
    Ok(values)
}

/// Reads an external solver's values for `built` and accepts them only if
/// the resulting plan passes validation.
pub fn import_solution(built: &BuiltModel, net: &BeamNetwork, path: &Path) -> Result<Solution> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = read_values(&built.model, &text, path)?;
    let sol = built
        .decode(net, &values, SolveStatus::External, false)
        .map_err(Error::Rejected)?;
    super::validate_solution(net, &built.options, &sol).map_err(Error::Rejected)?;
    Ok(sol)
}
