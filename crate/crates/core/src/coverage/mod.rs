//! Sparse farm–flight–time coverage: which qualified farm can reach which
//! aircraft at which grid step, with slant ranges and transfer coefficients,
//! optionally expanded over departure-time shifts.

mod cache;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::{coverage_key, read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};

use crate::error::{Error, Result};
use crate::geo::{slant_range, Trajectory};
use crate::ingest::FlightRecord;
use crate::physics::{BeamParams, QualifiedFarm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0_utc: i64,
    pub dt_s: i64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn time_of(&self, step: usize) -> i64 {
        self.t0_utc + step as i64 * self.dt_s
    }

    pub fn end_utc(&self) -> i64 {
        self.time_of(self.n_steps - 1)
    }

    /// Grid steps falling inside `[start, end]`, if any.
    pub fn steps_within(&self, start: i64, end: i64) -> Option<(usize, usize)> {
        let first = (start - self.t0_utc).div_euclid(self.dt_s)
            + i64::from((start - self.t0_utc).rem_euclid(self.dt_s) != 0);
        let last = (end - self.t0_utc).div_euclid(self.dt_s);
        let first = first.max(0);
        let last = last.min(self.n_steps as i64 - 1);
        (first <= last).then_some((first as usize, last as usize))
    }
}

/// Covers every flight's airborne window padded by `tau_max_s` on both
/// sides, snapped outward to multiples of `dt_s`.
pub fn build_time_grid(flights: &[FlightRecord], dt_s: i64, tau_max_s: i64) -> Result<TimeGrid> {
    if flights.is_empty() {
        return Err(Error::InvalidInput("cannot build a time grid without flights".into()));
    }
    if dt_s <= 0 || tau_max_s < 0 {
        return Err(Error::InvalidInput(format!("bad grid spacing dt={dt_s} tau_max={tau_max_s}")));
    }
    let start = flights.iter().map(|f| f.wheels_off_utc).min().unwrap() - tau_max_s;
    let end = flights.iter().map(FlightRecord::wheels_on_utc).max().unwrap() + tau_max_s;
    let t0 = start.div_euclid(dt_s) * dt_s;
    let t_end = -((-end).div_euclid(dt_s)) * dt_s;
    Ok(TimeGrid {
        t0_utc: t0,
        dt_s,
        n_steps: ((t_end - t0) / dt_s) as usize + 1,
    })
}

/// Admissible departure shifts, in grid steps, symmetric about zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSet {
    pub tau_max_s: i64,
    pub dt_s: i64,
    pub shifts: Vec<i32>,
}

impl ShiftSet {
    pub fn new(tau_max_s: i64, dt_s: i64) -> Result<Self> {
        if dt_s <= 0 || tau_max_s < 0 || tau_max_s % dt_s != 0 {
            return Err(Error::InvalidInput(format!(
                "tau_max ({tau_max_s} s) must be a non-negative multiple of dt ({dt_s} s)"
            )));
        }
        let k = (tau_max_s / dt_s) as i32;
        if k > i16::MAX as i32 {
            return Err(Error::InvalidInput("too many shift steps".into()));
        }
        Ok(ShiftSet {
            tau_max_s,
            dt_s,
            shifts: (-k..=k).collect(),
        })
    }

    pub fn max_steps(&self) -> i32 {
        (self.tau_max_s / self.dt_s) as i32
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub farm: u32,
    pub flight: u32,
    /// Global grid step.
    pub t: u32,
    /// Departure shift in grid steps (0 when there is no shift dimension).
    pub shift: i16,
    pub z_m: f64,
    /// Transfer coefficient at `z_m`.
    pub coef: f64,
}

/// Steps `[first, last]` during which a flight is airborne at zero shift.
pub type AirborneWindow = Option<(u32, u32)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSet {
    pub n_farms: usize,
    pub n_flights: usize,
    pub grid: TimeGrid,
    pub shifts: Option<ShiftSet>,
    /// Sorted by `(flight, t, farm, shift)`.
    pub entries: Vec<CoverageEntry>,
    pub airborne: Vec<AirborneWindow>,
}

impl CoverageSet {
    /// Shift offsets carried by this set; `[0]` when unshifted.
    pub fn shift_values(&self) -> Vec<i32> {
        self.shifts.as_ref().map_or_else(|| vec![0], |s| s.shifts.clone())
    }

    pub fn is_airborne(&self, flight: usize, t: usize, shift: i32) -> bool {
        match self.airborne[flight] {
            Some((first, last)) => {
                let base = t as i64 - shift as i64;
                base >= first as i64 && base <= last as i64
            }
            None => false,
        }
    }

    /// Entries restricted to shift zero, re-labelled as an unshifted set.
    pub fn without_shifts(&self) -> CoverageSet {
        CoverageSet {
            shifts: None,
            entries: self.entries.iter().filter(|e| e.shift == 0).copied().collect(),
            ..self.clone()
        }
    }

    /// Pure time translation of the unshifted entries over every shift.
    pub fn with_shifts(&self, shifts: &ShiftSet) -> CoverageSet {
        let base = self.without_shifts();
        let mut entries = Vec::with_capacity(base.entries.len() * shifts.len());
        for e in &base.entries {
            for &s in &shifts.shifts {
                let t = e.t as i64 + s as i64;
                if t >= 0 && (t as usize) < self.grid.n_steps {
                    entries.push(CoverageEntry {
                        t: t as u32,
                        shift: s as i16,
                        ..*e
                    });
                }
            }
        }
        sort_entries(&mut entries);
        CoverageSet {
            shifts: Some(shifts.clone()),
            entries,
            ..base
        }
    }
}

fn sort_entries(entries: &mut [CoverageEntry]) {
    entries.sort_by_key(|e| (e.flight, e.t, e.farm, e.shift));
}

/// Cheap gate: `false` only when the farm's beam disk cannot touch the
/// flight's great circle, even with one step of slack.
pub fn coverage_prefilter(trajectory: &Trajectory, farm: &QualifiedFarm) -> bool {
    let radius_m = farm.ground_radius_m(trajectory.altitude_m);
    let slack_m = trajectory.dt_s as f64 * trajectory.speed_mps;
    trajectory.arc().cross_track_km(farm.base.location) * 1000.0 <= radius_m + slack_m
}

/// Unshifted coverage entries for one flight.
fn flight_entries(
    flight: usize,
    trajectory: &Trajectory,
    farms: &[QualifiedFarm],
    grid: &TimeGrid,
    params: &BeamParams,
) -> (AirborneWindow, Vec<CoverageEntry>) {
    let Some((first, last)) = grid.steps_within(trajectory.wheels_off_utc, trajectory.wheels_on_utc) else {
        return (None, Vec::new());
    };
    let window = Some((first as u32, last as u32));
    let gated: Vec<usize> = (0..farms.len())
        .filter(|&f| coverage_prefilter(trajectory, &farms[f]))
        .collect();
    let mut out = Vec::new();
    if gated.is_empty() {
        return (window, out);
    }
    for t in first..=last {
        let pos = trajectory.position_at(grid.time_of(t));
        for &f in &gated {
            let farm = &farms[f];
            let z = slant_range(farm.base.location, pos, trajectory.altitude_m);
            if z <= farm.r_beam_m {
                out.push(CoverageEntry {
                    farm: f as u32,
                    flight: flight as u32,
                    t: t as u32,
                    shift: 0,
                    z_m: z,
                    coef: params.transfer_coefficient(z),
                });
            }
        }
    }
    (window, out)
}

/// Builds the coverage set; flights are processed in parallel and merged in
/// a fixed order, so the output is independent of scheduling.
pub fn compute_coverage(
    trajectories: &[Trajectory],
    farms: &[QualifiedFarm],
    grid: &TimeGrid,
    shifts: Option<&ShiftSet>,
    params: &BeamParams,
) -> Result<CoverageSet> {
    if let Some(t) = trajectories.iter().find(|t| t.dt_s != grid.dt_s) {
        return Err(Error::InvalidInput(format!(
            "trajectory {} uses dt={} s but the grid uses dt={} s",
            t.flight_id, t.dt_s, grid.dt_s
        )));
    }
    if let Some(s) = shifts {
        if s.dt_s != grid.dt_s {
            return Err(Error::InvalidInput("shift set and grid disagree on dt".into()));
        }
    }
    let per_flight: Vec<(AirborneWindow, Vec<CoverageEntry>)> = trajectories
        .par_iter()
        .enumerate()
        .map(|(i, tr)| flight_entries(i, tr, farms, grid, params))
        .collect();
    let mut airborne = Vec::with_capacity(per_flight.len());
    let mut entries = Vec::new();
    for (window, mut e) in per_flight {
        airborne.push(window);
        entries.append(&mut e);
    }
    sort_entries(&mut entries);
    let base = CoverageSet {
        n_farms: farms.len(),
        n_flights: trajectories.len(),
        grid: *grid,
        shifts: None,
        entries,
        airborne,
    };
    Ok(match shifts {
        Some(s) => base.with_shifts(s),
        None => base,
    })
}
