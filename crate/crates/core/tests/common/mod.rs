//! Shared test support: micro-instance generators and independent oracles.
//!
//! The oracles never call into the optimizer. Plans are found by exhaustive
//! enumeration of every integer decision, with each remaining continuous
//! problem solved by a small exact-rational simplex.

#![allow(dead_code)]

pub mod exact_lp;

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use skybeam::coverage::{CoverageEntry, CoverageSet, ShiftSet, TimeGrid};
use skybeam::economics::{EconomicParams, Rates};
use skybeam::geo::GroundPoint;
use skybeam::optimize::{BeamNetwork, ModelOptions, Penetration};
use skybeam::physics::AircraftParams;

use exact_lp::{q, LpResult, RationalLp};

pub const THRESHOLD_MW: f64 = 1.0;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Net dollars per MWh received, from the prices and aircraft directly.
pub fn dollars_per_mwh(e: &EconomicParams, a: &AircraftParams) -> f64 {
    let cruise_mw = a.drag_n * a.cruise_speed_mps / a.prop_efficiency / 1e6;
    let fuel_kg_per_mwh = a.fuel_flow_kg_h / cruise_mw;
    fuel_kg_per_mwh * (e.fuel_price + e.fuel_emission * e.carbon_price)
        - e.elec_price
        - e.solar_emission * e.carbon_price
}

pub fn default_rates() -> Rates {
    Rates::new(EconomicParams::default(), &AircraftParams::default())
}

/// Shape limits for random micro-instances.
#[derive(Debug, Clone, Copy)]
pub struct MicroShape {
    pub max_farms: usize,
    pub max_flights: usize,
    pub max_steps: usize,
    /// Largest shift in steps; shifts run over `-k..=k`.
    pub max_shift: i32,
}

impl Default for MicroShape {
    fn default() -> Self {
        MicroShape {
            max_farms: 3,
            max_flights: 4,
            max_steps: 6,
            max_shift: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Micro {
    pub base: CoverageSet,
    pub capacities: Vec<f64>,
    pub shifts: ShiftSet,
}

impl Micro {
    pub fn ids(&self) -> Vec<String> {
        (0..self.base.n_flights).map(|i| format!("F{i}")).collect()
    }

    /// Network over shifted coverage for the schedule problem.
    pub fn schedule_net(&self, rates: Rates) -> BeamNetwork {
        BeamNetwork::from_capacities(
            self.base.with_shifts(&self.shifts),
            self.capacities.clone(),
            self.ids(),
            rates,
            THRESHOLD_MW,
        )
        .unwrap()
    }

    /// Network over unshifted coverage for the choice problem.
    pub fn choice_net(&self, rates: Rates) -> BeamNetwork {
        BeamNetwork::from_capacities(self.base.clone(), self.capacities.clone(), self.ids(), rates, THRESHOLD_MW)
            .unwrap()
    }
}

/// A random coverage pattern: each flight is airborne over a window of the
/// grid and sees each farm at each airborne step with probability one half.
/// Capacities and transfer coefficients are drawn so that single farms
/// sometimes, but not always, clear the received-power threshold.
pub fn micro(rng: &mut StdRng, shape: MicroShape) -> Micro {
    let n_farms = rng.gen_range(1..=shape.max_farms);
    let n_flights = rng.gen_range(1..=shape.max_flights);
    let n_steps = rng.gen_range(1..=shape.max_steps);
    let dt = 60;
    let k = rng.gen_range(0..=shape.max_shift);
    let mut entries = Vec::new();
    let mut airborne = Vec::new();
    for i in 0..n_flights {
        let a = rng.gen_range(0..n_steps);
        let b = rng.gen_range(a..n_steps);
        airborne.push(Some((a as u32, b as u32)));
        for t in a..=b {
            for f in 0..n_farms {
                if rng.gen_bool(0.5) {
                    let coef = rng.gen_range(0.02..0.07);
                    entries.push(CoverageEntry {
                        farm: f as u32,
                        flight: i as u32,
                        t: t as u32,
                        shift: 0,
                        z_m: 745.7 / coef,
                        coef,
                    });
                }
            }
        }
    }
    entries.sort_by_key(|e| (e.flight, e.t, e.farm, e.shift));
    let capacities = (0..n_farms).map(|_| rng.gen_range(10.0..60.0)).collect();
    Micro {
        base: CoverageSet {
            n_farms,
            n_flights,
            grid: TimeGrid {
                t0_utc: 0,
                dt_s: dt,
                n_steps,
            },
            shifts: None,
            entries,
            airborne,
        },
        capacities,
        shifts: ShiftSet::new(k as i64 * dt, dt).unwrap(),
    }
}

/// Receivers seen at one step: per flight, its `(farm, coef)` list.
type StepView = Vec<(usize, Vec<(usize, f64)>)>;

/// Most power (MW) the active receivers `active` can take at one step, or
/// `None` if some active receiver cannot reach the threshold. `targets`
/// optionally restricts each farm to one flight.
fn step_lp(
    view: &StepView,
    active: &[usize],
    capacity: &[f64],
    threshold: f64,
    cap: Option<f64>,
    targets: Option<&[Option<usize>]>,
) -> Option<f64> {
    let mut pairs = Vec::new();
    for &k in active {
        let (flight, seen) = &view[k];
        for &(farm, coef) in seen {
            if targets.is_some_and(|t| t[farm] != Some(*flight)) {
                continue;
            }
            if capacity[farm] > 0.0 {
                pairs.push((farm, k, coef));
            }
        }
    }
    let mut lp = RationalLp::new(pairs.iter().map(|p| q(p.2)).collect());
    for (f, &c) in capacity.iter().enumerate() {
        let row: Vec<_> = pairs.iter().map(|p| if p.0 == f { q(1.0) } else { q(0.0) }).collect();
        if pairs.iter().any(|p| p.0 == f) {
            lp.le(row, q(c));
        }
    }
    for &k in active {
        let got: Vec<_> = pairs.iter().map(|p| if p.1 == k { q(p.2) } else { q(0.0) }).collect();
        lp.le(got.iter().map(|x| -x.clone()).collect(), q(-threshold));
        if let Some(c) = cap {
            lp.le(got, q(c));
        }
    }
    match lp.maximize() {
        LpResult::Optimal(z) => Some(z),
        LpResult::Infeasible => None,
        LpResult::Unbounded => panic!("bounded by farm capacities"),
    }
}

/// Best total received power at one step over every subset of receivers
/// (and, when asked, every farm-to-flight targeting).
fn best_step(view: &StepView, capacity: &[f64], threshold: f64, opts: &ModelOptions) -> f64 {
    let n = view.len();
    let mut best = 0.0f64;
    for mask in 1u32..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        if opts.single_target_per_farm {
            let flights: Vec<usize> = active.iter().map(|&k| view[k].0).collect();
            let n_farms = capacity.len();
            let choices = flights.len() + 1;
            for code in 0..choices.pow(n_farms as u32) {
                let mut c = code;
                let targets: Vec<Option<usize>> = (0..n_farms)
                    .map(|_| {
                        let pick = c % choices;
                        c /= choices;
                        (pick > 0).then(|| flights[pick - 1])
                    })
                    .collect();
                if let Some(z) = step_lp(view, &active, capacity, threshold, opts.cruise_cap_mw, Some(&targets)) {
                    best = best.max(z);
                }
            }
        } else if let Some(z) = step_lp(view, &active, capacity, threshold, opts.cruise_cap_mw, None) {
            best = best.max(z);
        }
    }
    best
}

fn entries_at(cov: &CoverageSet, flight: usize, t: usize) -> Vec<(usize, f64)> {
    cov.entries
        .iter()
        .filter(|e| e.flight as usize == flight && e.t as usize == t && e.shift == 0)
        .map(|e| (e.farm as usize, e.coef))
        .collect()
}

/// Objective of the best plan found by enumerating every departure-shift
/// combination. Works from the unshifted pattern and translates it itself.
pub fn oracle_schedule(m: &Micro, per_mwh: f64, opts: &ModelOptions) -> f64 {
    if per_mwh <= 0.0 {
        return 0.0;
    }
    let base = &m.base;
    let shifts = &m.shifts.shifts;
    let n_i = base.n_flights;
    let mut memo: HashMap<(usize, Vec<(usize, i32)>), f64> = HashMap::new();
    let mut best_total = 0.0f64;
    for code in 0..shifts.len().pow(n_i as u32) {
        let mut c = code;
        let chosen: Vec<i32> = (0..n_i)
            .map(|_| {
                let s = shifts[c % shifts.len()];
                c /= shifts.len();
                s
            })
            .collect();
        let mut total = 0.0;
        for t in 0..base.grid.n_steps {
            let key: Vec<(usize, i32)> = (0..n_i)
                .filter(|&i| {
                    let src = t as i64 - chosen[i] as i64;
                    src >= 0 && (src as usize) < base.grid.n_steps && !entries_at(base, i, src as usize).is_empty()
                })
                .map(|i| (i, chosen[i]))
                .collect();
            if key.is_empty() {
                continue;
            }
            let v = memo.entry((t, key.clone())).or_insert_with(|| {
                let view: StepView = key
                    .iter()
                    .map(|&(i, s)| (i, entries_at(base, i, (t as i64 - s as i64) as usize)))
                    .collect();
                best_step(&view, &m.capacities, THRESHOLD_MW, opts)
            });
            total += *v;
        }
        best_total = best_total.max(total);
    }
    best_total * base.grid.dt_s as f64 / 3600.0 * per_mwh
}

fn subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).collect()
}

fn count(rho: f64, n: usize) -> usize {
    // nearest integer, halves to even, clamped
    let x = rho * n as f64;
    let fl = x.floor();
    let r = if x - fl > 0.5 || (x - fl == 0.5 && fl as i64 % 2 == 1) { fl + 1.0 } else { fl };
    (r.max(0.0) as usize).min(n)
}

/// Objective of the best equipment choice at `pen`, enumerating every farm
/// and flight subset of the required sizes.
pub fn oracle_choice(m: &Micro, pen: Penetration, per_mwh: f64, opts: &ModelOptions) -> f64 {
    if per_mwh <= 0.0 {
        return 0.0;
    }
    let base = &m.base;
    let (n_f, n_i) = (base.n_farms, base.n_flights);
    let (k_f, k_i) = (count(pen.rho_farm, n_f), count(pen.rho_flight, n_i));
    let mut best_total = 0.0f64;
    for fm in subsets(n_f, k_f) {
        let capacity: Vec<f64> = (0..n_f)
            .map(|f| if fm >> f & 1 == 1 { m.capacities[f] } else { 0.0 })
            .collect();
        for im in subsets(n_i, k_i) {
            let mut total = 0.0;
            for t in 0..base.grid.n_steps {
                let view: StepView = (0..n_i)
                    .filter(|&i| im >> i & 1 == 1)
                    .map(|i| (i, entries_at(base, i, t)))
                    .filter(|v| !v.1.is_empty())
                    .collect();
                if !view.is_empty() {
                    total += best_step(&view, &capacity, THRESHOLD_MW, opts);
                }
            }
            best_total = best_total.max(total);
        }
    }
    best_total * base.grid.dt_s as f64 / 3600.0 * per_mwh
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Distance (km) by the spherical law of cosines on a 6,371.0088 km sphere,
/// computed in vector form for small separations.
pub fn sphere_distance_km(a: GroundPoint, b: GroundPoint) -> f64 {
    let u = unit(a);
    let v = unit(b);
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    sin.atan2(cos) * 6371.0088
}

fn unit(p: GroundPoint) -> [f64; 3] {
    let (la, lo) = (p.lat.to_radians(), p.lon.to_radians());
    [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
}

/// Point a fraction `f` of the way from `a` to `b` along the minor arc,
/// by rotating `a` about the arc's pole.
pub fn along_arc(a: GroundPoint, b: GroundPoint, f: f64) -> GroundPoint {
    let u = unit(a);
    let v = unit(b);
    let total = sphere_distance_km(a, b) / 6371.0088;
    if total < 1e-15 {
        return a;
    }
    // orthonormal direction from u toward v in the arc's plane
    let d = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let mut w = [v[0] - d * u[0], v[1] - d * u[1], v[2] - d * u[2]];
    let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    for x in &mut w {
        *x /= n;
    }
    let ang = f * total;
    let p = [
        u[0] * ang.cos() + w[0] * ang.sin(),
        u[1] * ang.cos() + w[1] * ang.sin(),
        u[2] * ang.cos() + w[2] * ang.sin(),
    ];
    GroundPoint {
        lat: p[2].asin().to_degrees(),
        lon: p[1].atan2(p[0]).to_degrees(),
    }
}

/// A random geographic instance: airports, flights between them and farms
/// scattered near the flight paths.
#[derive(Debug, Clone)]
pub struct GeoCase {
    pub airports: skybeam::ingest::AirportTable,
    pub flights: Vec<skybeam::ingest::FlightRecord>,
    pub farms: Vec<skybeam::ingest::SolarFarmRecord>,
    pub dt_s: i64,
    pub tau_s: i64,
    pub altitude_m: f64,
}

pub fn geo_case(rng: &mut StdRng) -> GeoCase {
    use skybeam::ingest::{Airport, FlightRecord, SolarFarmRecord};
    let n_airports = rng.gen_range(2..=5);
    let mut airports = skybeam::ingest::AirportTable::new();
    let mut spots = Vec::new();
    for k in 0..n_airports {
        let p = GroundPoint {
            lat: rng.gen_range(29.0..34.0),
            lon: rng.gen_range(-101.0..-95.0),
        };
        let code = format!("A{k}");
        airports.insert(
            code.clone(),
            Airport {
                code: code.clone(),
                lat: p.lat,
                lon: p.lon,
                utc_offset_hours: -6.0,
            },
        );
        spots.push((code, p));
    }
    let dt_s = [60, 120, 300][rng.gen_range(0..3)];
    let tau_s = dt_s * rng.gen_range(0..=3);
    let base = 1_768_384_800;
    let flights: Vec<FlightRecord> = (0..rng.gen_range(1..=6))
        .map(|k| {
            let o = rng.gen_range(0..n_airports);
            let d = (o + rng.gen_range(1..n_airports)) % n_airports;
            FlightRecord {
                flight_id: format!("X{k}"),
                origin: spots[o].0.clone(),
                destination: spots[d].0.clone(),
                wheels_off_utc: base + rng.gen_range(0..10_800),
                elapsed_s: rng.gen_range(1_800..5_400),
            }
        })
        .collect();
    let farms = (0..rng.gen_range(3..=15))
        .map(|k| {
            let f = &flights[rng.gen_range(0..flights.len())];
            let a = airports[&f.origin].location();
            let b = airports[&f.destination].location();
            let on_path = along_arc(a, b, rng.gen_range(0.0..1.0));
            let location = GroundPoint {
                lat: on_path.lat + rng.gen_range(-0.5..0.5),
                lon: on_path.lon + rng.gen_range(-0.5..0.5),
            };
            let dc = rng.gen_range(5.0..100.0);
            SolarFarmRecord {
                farm_id: format!("S{k}"),
                name: format!("S{k}"),
                location,
                dc_capacity_mw: dc,
                area_m2: dc * 1e6 / 20.0 * rng.gen_range(0.6..1.5),
                boundary: None,
                state: "TX".into(),
                county: String::new(),
            }
        })
        .collect();
    GeoCase {
        airports,
        flights,
        farms,
        dt_s,
        tau_s,
        altitude_m: [9_100.0, 12_100.0, 15_100.0][rng.gen_range(0..3)],
    }
}

/// One expected coverage link, keyed `(farm, flight, step, shift)` with the
/// farm indexed among qualifying farms.
pub type LinkKey = (usize, usize, usize, i32);

/// Every link found by brute force over flights x steps x farms x shifts,
/// with its slant range and the farm's beam range.
pub struct NaiveCoverage {
    pub t0: i64,
    pub n_steps: usize,
    /// Every airborne (farm, flight, step, shift) with slant and beam range.
    pub links: Vec<(LinkKey, f64, f64)>,
    /// Effective capacity of each qualifying farm, MW.
    pub capacities_mw: Vec<f64>,
}

pub fn naive_coverage(case: &GeoCase) -> NaiveCoverage {
    let eta = 0.6887 * 0.95 * 0.7867 * 0.87;
    let area = 261.6;
    let lambda = 0.05;
    let eps_w = 1e6;
    let p_min_w = std::f64::consts::PI * lambda * eps_w * case.altitude_m / (eta * area);
    let qualified: Vec<(GroundPoint, f64, f64)> = case
        .farms
        .iter()
        .filter_map(|f| {
            let p_w = (f.dc_capacity_mw * 1e6).min(20.0 * f.area_m2);
            (p_w >= p_min_w).then(|| (f.location, eta * area * p_w / (std::f64::consts::PI * lambda * eps_w), p_w / 1e6))
        })
        .collect();
    let dt = case.dt_s;
    let first_off = case.flights.iter().map(|f| f.wheels_off_utc).min().unwrap();
    let last_on = case.flights.iter().map(|f| f.wheels_off_utc + f.elapsed_s).max().unwrap();
    let t0 = (first_off - case.tau_s).div_euclid(dt) * dt;
    let t_end = -((-(last_on + case.tau_s)).div_euclid(dt)) * dt;
    let n_steps = ((t_end - t0) / dt) as usize + 1;
    let k = (case.tau_s / dt) as i32;
    let mut links = Vec::new();
    for (i, fl) in case.flights.iter().enumerate() {
        let a = case.airports[&fl.origin].location();
        let b = case.airports[&fl.destination].location();
        for s in -k..=k {
            let dep = fl.wheels_off_utc + s as i64 * dt;
            for t in 0..n_steps {
                let now = t0 + t as i64 * dt;
                if now < dep || now > dep + fl.elapsed_s {
                    continue;
                }
                let pos = along_arc(a, b, (now - dep) as f64 / fl.elapsed_s as f64);
                for (f, &(loc, r, _)) in qualified.iter().enumerate() {
                    let ground = sphere_distance_km(loc, pos) * 1000.0;
                    let z = (ground * ground + case.altitude_m * case.altitude_m).sqrt();
                    links.push(((f, i, t, s), z, r));
                }
            }
        }
    }
    NaiveCoverage {
        t0,
        n_steps,
        links,
        capacities_mw: qualified.iter().map(|q| q.2).collect(),
    }
}

/// The oracle's own micro-instance for a geographic case: links inside beam
/// range at zero shift, with coefficients from the link budget.
pub fn micro_from_geo(case: &GeoCase) -> Micro {
    let naive = naive_coverage(case);
    let eta_area = 0.6887 * 0.95 * 0.7867 * 0.87 * 261.6;
    let mut entries: Vec<CoverageEntry> = naive
        .links
        .iter()
        .filter(|(k, z, r)| k.3 == 0 && z <= r)
        .map(|&((f, i, t, _), z, _)| CoverageEntry {
            farm: f as u32,
            flight: i as u32,
            t: t as u32,
            shift: 0,
            z_m: z,
            coef: eta_area / (std::f64::consts::PI * 0.05 * z),
        })
        .collect();
    entries.sort_by_key(|e| (e.flight, e.t, e.farm, e.shift));
    let airborne = case
        .flights
        .iter()
        .map(|f| {
            let first = (f.wheels_off_utc - naive.t0 + case.dt_s - 1).div_euclid(case.dt_s);
            let last = (f.wheels_off_utc + f.elapsed_s - naive.t0).div_euclid(case.dt_s);
            (first <= last).then_some((first as u32, last as u32))
        })
        .collect();
    Micro {
        base: CoverageSet {
            n_farms: naive.capacities_mw.len(),
            n_flights: case.flights.len(),
            grid: TimeGrid {
                t0_utc: naive.t0,
                dt_s: case.dt_s,
                n_steps: naive.n_steps,
            },
            shifts: None,
            entries,
            airborne,
        },
        capacities: naive.capacities_mw,
        shifts: ShiftSet::new(case.tau_s, case.dt_s).unwrap(),
    }
}

pub fn fixture(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

/// A bundled fixture's config, writing into `out`.
pub fn fixture_config(name: &str, out: &std::path::Path) -> skybeam::config::RunConfig {
    let mut cfg = skybeam::config::RunConfig::load(&fixture(&format!("{name}/config.json"))).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

/// The geographic case described by a bundled fixture at one altitude.
pub fn fixture_case(name: &str, altitude_m: f64) -> GeoCase {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(name, dir.path());
    let inputs = skybeam::pipeline::load_inputs(&cfg).unwrap();
    GeoCase {
        airports: inputs.airports,
        flights: inputs.flights,
        farms: inputs.farms,
        dt_s: cfg.dt_s,
        tau_s: cfg.tau_max_s,
        altitude_m,
    }
}

pub fn production_coverage(case: &GeoCase) -> CoverageSet {
    use skybeam::coverage::{build_time_grid, compute_coverage};
    use skybeam::geo::discretize_flight;
    use skybeam::physics::{qualify_farms, BeamParams};
    let params = BeamParams::default();
    let farms = qualify_farms(&case.farms, &params, case.altitude_m);
    let trajectories: Vec<_> = case
        .flights
        .iter()
        .map(|f| discretize_flight(f, &case.airports, case.altitude_m, case.dt_s).unwrap())
        .collect();
    let grid = build_time_grid(&case.flights, case.dt_s, case.tau_s).unwrap();
    let shifts = ShiftSet::new(case.tau_s, case.dt_s).unwrap();
    compute_coverage(&trajectories, &farms, &grid, Some(&shifts), &params).unwrap()
}

/// Compares production coverage with the brute-force links. Links within a
/// micrometre of the beam edge may land on either side.
pub fn coverage_agreement(case: &GeoCase) -> Result<usize, String> {
    let cov = production_coverage(case);
    let naive = naive_coverage(case);
    let (t0, n_steps, links) = (naive.t0, naive.n_steps, naive.links);
    if cov.grid.t0_utc != t0 || cov.grid.n_steps != n_steps {
        return Err(format!("grid {:?} vs t0={t0} n={n_steps}", cov.grid));
    }
    let got: std::collections::BTreeMap<LinkKey, (f64, f64)> = cov
        .entries
        .iter()
        .map(|e| ((e.farm as usize, e.flight as usize, e.t as usize, e.shift as i32), (e.z_m, e.coef)))
        .collect();
    if got.len() != cov.entries.len() {
        return Err("duplicate entries".into());
    }
    let eta_area = 0.6887 * 0.95 * 0.7867 * 0.87 * 261.6;
    let mut expected = 0;
    for (key, z, r) in &links {
        let edge = (z - r).abs() < 1e-6;
        match got.get(key) {
            Some(&(zp, coef)) => {
                if *z > *r && !edge {
                    return Err(format!("{key:?}: z={z} beyond range {r}"));
                }
                if (zp - z).abs() > 1e-3 {
                    return Err(format!("{key:?}: slant {zp} vs {z}"));
                }
                let want = eta_area / (std::f64::consts::PI * 0.05 * z);
                if (coef - want).abs() > 1e-9 * want {
                    return Err(format!("{key:?}: coef {coef} vs {want}"));
                }
                expected += 1;
            }
            None if *z <= *r && !edge => return Err(format!("{key:?}: missing, z={z} r={r}")),
            None => {}
        }
    }
    if expected != got.len() {
        return Err(format!("{} entries outside any airborne link", got.len() - expected));
    }
    Ok(expected)
}

