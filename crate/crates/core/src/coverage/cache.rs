//! Columnar binary cache for coverage sets.
//!
//! Layout (little-endian): magic `SPHC`, version `u16`, 32-byte parameter
//! hash, then six length-prefixed (`u64` count) columns: farm `u32`,
//! flight `u32`, t `u32`, shift `i16`, z `f64`, coef `f64`. The shift column
//! holds `i16::MIN` when the set has no shift dimension. A trailing section
//! carries the airborne windows and the grid/shift metadata.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CoverageEntry, CoverageSet, ShiftSet, TimeGrid};
use crate::error::{Error, Result};
use crate::geo::Trajectory;
use crate::physics::{BeamParams, QualifiedFarm};

pub const CACHE_MAGIC: &[u8; 4] = b"SPHC";
pub const CACHE_VERSION: u16 = 1;

const NO_SHIFT: i16 = i16::MIN;
const NO_WINDOW: u32 = u32::MAX;

/// Content hash of everything coverage depends on.
pub fn coverage_key(
    trajectories: &[Trajectory],
    farms: &[QualifiedFarm],
    grid: &TimeGrid,
    shifts: Option<&ShiftSet>,
    params: &BeamParams,
) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(CACHE_MAGIC);
    h.update(CACHE_VERSION.to_le_bytes());
    for t in trajectories {
        h.update((t.flight_id.len() as u64).to_le_bytes());
        h.update(t.flight_id.as_bytes());
        for v in [t.origin.lat, t.origin.lon, t.destination.lat, t.destination.lon, t.altitude_m] {
            h.update(v.to_le_bytes());
        }
        h.update(t.wheels_off_utc.to_le_bytes());
        h.update(t.wheels_on_utc.to_le_bytes());
        h.update(t.dt_s.to_le_bytes());
    }
    h.update([0xff]);
    for f in farms {
        h.update((f.base.farm_id.len() as u64).to_le_bytes());
        h.update(f.base.farm_id.as_bytes());
        for v in [f.base.location.lat, f.base.location.lon, f.p_effective_mw, f.r_beam_m] {
            h.update(v.to_le_bytes());
        }
    }
    h.update([0xff]);
    h.update(grid.t0_utc.to_le_bytes());
    h.update(grid.dt_s.to_le_bytes());
    h.update((grid.n_steps as u64).to_le_bytes());
    match shifts {
        Some(s) => h.update(s.tau_max_s.to_le_bytes()),
        None => h.update(b"noshift"),
    }
    for v in [
        params.eta_dc_rf,
        params.eta_free,
        params.eta_rf_dc,
        params.eta_spot,
        params.wavelength_m,
        params.receiver_area_m2,
        params.safety_density_w_m2,
        params.threshold_mw,
    ] {
        h.update(v.to_le_bytes());
    }
    h.finalize().into()
}

fn column<T: Copy>(out: &mut Vec<u8>, values: impl ExactSizeIterator<Item = T>, enc: impl Fn(T) -> Vec<u8>) {
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&enc(v));
    }
}

pub fn encode(set: &CoverageSet, key: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + set.entries.len() * 30);
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(key);
    let e = &set.entries;
    let has_shift = set.shifts.is_some();
    column(&mut out, e.iter().map(|e| e.farm), |v| v.to_le_bytes().to_vec());
    column(&mut out, e.iter().map(|e| e.flight), |v| v.to_le_bytes().to_vec());
    column(&mut out, e.iter().map(|e| e.t), |v| v.to_le_bytes().to_vec());
    column(
        &mut out,
        e.iter().map(|e| if has_shift { e.shift } else { NO_SHIFT }),
        |v| v.to_le_bytes().to_vec(),
    );
    column(&mut out, e.iter().map(|e| e.z_m), |v| v.to_le_bytes().to_vec());
    column(&mut out, e.iter().map(|e| e.coef), |v| v.to_le_bytes().to_vec());
    column(&mut out, set.airborne.iter().copied(), |w| {
        let (a, b) = w.unwrap_or((NO_WINDOW, NO_WINDOW));
        [a.to_le_bytes(), b.to_le_bytes()].concat()
    });
    out.extend_from_slice(&(set.n_farms as u64).to_le_bytes());
    out.extend_from_slice(&(set.n_flights as u64).to_le_bytes());
    out.extend_from_slice(&set.grid.t0_utc.to_le_bytes());
    out.extend_from_slice(&set.grid.dt_s.to_le_bytes());
    out.extend_from_slice(&(set.grid.n_steps as u64).to_le_bytes());
    out.extend_from_slice(&set.shifts.as_ref().map_or(-1, |s| s.tau_max_s).to_le_bytes());
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let bytes = self.buf.get(self.pos..self.pos + N)?;
        self.pos += N;
        bytes.try_into().ok()
    }

    fn u64(&mut self) -> Option<u64> {
        self.take::<8>().map(u64::from_le_bytes)
    }

    fn i64(&mut self) -> Option<i64> {
        self.take::<8>().map(i64::from_le_bytes)
    }

    fn column<T, const N: usize>(&mut self, dec: impl Fn([u8; N]) -> T) -> Option<Vec<T>> {
        let n = self.u64()? as usize;
        if n.checked_mul(N)? > self.buf.len().saturating_sub(self.pos) {
            return None;
        }
        (0..n).map(|_| self.take::<N>().map(&dec)).collect()
    }
}

pub fn decode(buf: &[u8]) -> Option<([u8; 32], CoverageSet)> {
    let mut c = Cursor { buf, pos: 0 };
    if &c.take::<4>()? != CACHE_MAGIC || u16::from_le_bytes(c.take::<2>()?) != CACHE_VERSION {
        return None;
    }
    let key = c.take::<32>()?;
    let farm = c.column(u32::from_le_bytes)?;
    let flight = c.column(u32::from_le_bytes)?;
    let t = c.column(u32::from_le_bytes)?;
    let shift = c.column(i16::from_le_bytes)?;
    let z = c.column(f64::from_le_bytes)?;
    let coef = c.column(f64::from_le_bytes)?;
    let n = farm.len();
    if [flight.len(), t.len(), shift.len(), z.len(), coef.len()].iter().any(|&l| l != n) {
        return None;
    }
    let airborne = c.column(|b: [u8; 8]| {
        let a = u32::from_le_bytes(b[..4].try_into().unwrap());
        let e = u32::from_le_bytes(b[4..].try_into().unwrap());
        (a != NO_WINDOW).then_some((a, e))
    })?;
    let n_farms = c.u64()? as usize;
    let n_flights = c.u64()? as usize;
    let grid = TimeGrid {
        t0_utc: c.i64()?,
        dt_s: c.i64()?,
        n_steps: c.u64()? as usize,
    };
    let tau = c.i64()?;
    if c.pos != buf.len() || airborne.len() != n_flights || grid.dt_s <= 0 {
        return None;
    }
    let shifts = if tau >= 0 { Some(ShiftSet::new(tau, grid.dt_s).ok()?) } else { None };
    let entries = (0..n)
        .map(|k| CoverageEntry {
            farm: farm[k],
            flight: flight[k],
            t: t[k],
            shift: if shift[k] == NO_SHIFT { 0 } else { shift[k] },
            z_m: z[k],
            coef: coef[k],
        })
        .collect();
    Some((
        key,
        CoverageSet {
            n_farms,
            n_flights,
            grid,
            shifts,
            entries,
            airborne,
        },
    ))
}

pub fn write_cache(path: &Path, set: &CoverageSet, key: &[u8; 32]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(set, key)).map_err(|e| Error::io(path, e))
}

/// Reads a cache file; the stored key must match `expected_key`.
pub fn read_cache(path: &Path, expected_key: &[u8; 32]) -> Result<CoverageSet> {
    let mut buf = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    let (key, set) = decode(&buf).ok_or_else(|| Error::format(path, "corrupt coverage cache"))?;
    if &key != expected_key {
        return Err(Error::format(path, "coverage cache key mismatch"));
    }
    Ok(set)
}
