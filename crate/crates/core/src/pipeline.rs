//! End-to-end stages behind the command-line tool: ingest, qualification,
//! trajectories, cached coverage, the two optimizations and their reports.
//!
//! Every artifact is a pure function of the configuration and input files,
//! so two runs with the same config hash write byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::{BackendKind, RunConfig};
use crate::coverage::{
    build_time_grid, compute_coverage, coverage_key, read_cache, write_cache, CoverageSet, ShiftSet, TimeGrid,
};
use crate::economics::{Rates, SavingsBreakdown};
use crate::error::{Error, Result};
use crate::geo::{discretize_flight, Trajectory};
use crate::ingest::{
    load_airport_states, load_airports, load_farms, load_flights, AirportTable, FlightRecord, IngestReport,
    SolarFarmRecord,
};
use crate::optimize::{
    build_choice_model, build_schedule_model, export_model, import_solution, penetration_sweep, solve_schedule,
    validate_solution, Backend, BeamNetwork, ModelFormat, Penetration, ProblemKind, Solution, SolveStatus,
};
use crate::physics::{cruise_power, end_to_end_efficiency, min_qualifying_capacity, qualify_farms, QualifiedFarm};
use crate::report::{
    aggregate_scenarios, farms_geojson, flights_geojson, frequency_csv, rows_csv, shift_summary_json, surface_csv,
    write_text, Dimension, FarmMeta, FlightMeta, ReportContext, ShiftSummary,
};

/// Which optimization a `report` or `export-model` call refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemChoice {
    Schedule,
    Choice,
}

impl std::str::FromStr for ProblemChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "schedule" => Ok(ProblemChoice::Schedule),
            "choice" => Ok(ProblemChoice::Choice),
            other => Err(format!("unknown problem `{other}` (schedule, choice)")),
        }
    }
}

/// Files written by a stage. `degraded` is set when any solve stopped at a
/// size, time or iteration limit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageOutput {
    pub files: Vec<PathBuf>,
    pub degraded: bool,
}

impl StageOutput {
    fn merge(&mut self, other: StageOutput) {
        self.files.extend(other.files);
        self.degraded |= other.degraded;
    }
}

/// Exit code for an error: 2 configuration, 3 data, 4 solver limit, 5 I/O.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::SizeCap { .. } | Error::IterationLimit => 4,
        Error::Io { .. } => 5,
        Error::MissingColumn { .. }
        | Error::Format { .. }
        | Error::InvalidInput(_)
        | Error::Antipodal
        | Error::Infeasible
        | Error::Unbounded
        | Error::Rejected(_)
        | Error::UnknownVariable(_) => 3,
    }
}

/// Machine-readable error record for stderr.
pub fn error_json(err: &Error) -> String {
    let kind = match err {
        Error::Config(_) => "config",
        Error::SizeCap { .. } => "size_cap",
        Error::IterationLimit => "iteration_limit",
        Error::Io { .. } => "io",
        Error::MissingColumn { .. } => "missing_column",
        Error::Format { .. } => "format",
        Error::InvalidInput(_) => "invalid_input",
        Error::Antipodal => "antipodal",
        Error::Infeasible => "infeasible",
        Error::Unbounded => "unbounded",
        Error::Rejected(_) => "rejected",
        Error::UnknownVariable(_) => "unknown_variable",
    };
    json!({"error": kind, "message": err.to_string(), "exit_code": exit_code(err)}).to_string()
}

/// Parsed inputs shared by every altitude.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub config_hash: String,
    pub airports: AirportTable,
    pub flights: Vec<FlightRecord>,
    pub farms: Vec<SolarFarmRecord>,
    pub airport_states: BTreeMap<String, String>,
    pub airport_report: IngestReport,
    pub flight_report: IngestReport,
    pub farm_report: IngestReport,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let (airports, airport_report) = load_airports(&cfg.airports_path(), &cfg.columns.airports)?;
    let (flights, flight_report) = load_flights(&cfg.flights_path(), &airports, &cfg.columns.flights)?;
    let (farms, farm_report) = load_farms(&cfg.farms_path(), &cfg.columns.farms)?;
    let airport_states = match cfg.airport_states_path() {
        Some(p) => load_airport_states(&p)?,
        None => BTreeMap::new(),
    };
    if flights.is_empty() {
        return Err(Error::InvalidInput("no usable flights in the flights file".into()));
    }
    Ok(Inputs {
        config_hash: cfg.config_hash(),
        airports,
        flights,
        farms,
        airport_states,
        airport_report,
        flight_report,
        farm_report,
    })
}

/// Everything derived for one cruise altitude.
#[derive(Debug, Clone)]
pub struct AltitudeData {
    pub altitude_m: f64,
    pub qualified: Vec<QualifiedFarm>,
    pub trajectories: Vec<Trajectory>,
    pub grid: TimeGrid,
    /// Coverage over every admissible departure shift.
    pub coverage: CoverageSet,
    pub cache_hit: bool,
    pub cache_path: PathBuf,
}

impl AltitudeData {
    pub fn network(&self, cfg: &RunConfig, inputs: &Inputs, shifted: bool) -> Result<BeamNetwork> {
        let coverage = if shifted {
            self.coverage.clone()
        } else {
            self.coverage.without_shifts()
        };
        BeamNetwork::new(
            coverage,
            &self.qualified,
            inputs.flights.iter().map(|f| f.flight_id.clone()).collect(),
            rates(cfg),
            cfg.beam_params.threshold_mw,
        )
    }

    pub fn report_context(&self, cfg: &RunConfig, inputs: &Inputs) -> ReportContext {
        let flights = self
            .trajectories
            .iter()
            .zip(&inputs.flights)
            .map(|(tr, rec)| {
                let origin = &inputs.airports[&rec.origin];
                let dest = &inputs.airports[&rec.destination];
                FlightMeta {
                    flight_id: rec.flight_id.clone(),
                    origin: rec.origin.clone(),
                    destination: rec.destination.clone(),
                    origin_point: origin.location(),
                    destination_point: dest.location(),
                    origin_utc_offset_hours: origin.utc_offset_hours,
                    origin_state: inputs.airport_states.get(&rec.origin).cloned(),
                    destination_state: inputs.airport_states.get(&rec.destination).cloned(),
                    distance_km: tr.ground_distance_km,
                }
            })
            .collect();
        let farms = self
            .qualified
            .iter()
            .map(|q| FarmMeta {
                farm_id: q.base.farm_id.clone(),
                name: q.base.name.clone(),
                state: Some(q.base.state.clone()).filter(|s| !s.is_empty()),
                county: q.base.county.clone(),
                location: q.base.location,
                capacity_mw: q.p_effective_mw,
            })
            .collect();
        ReportContext {
            grid: self.grid,
            flights,
            farms,
            rates: rates(cfg),
            day_night_mode: cfg.flags.day_night_mode,
        }
    }
}

fn rates(cfg: &RunConfig) -> Rates {
    Rates::new(cfg.economic_params, &cfg.aircraft_params)
}

fn altitude_tag(h: f64) -> String {
    format!("h{:.0}", h)
}

fn backend(cfg: &RunConfig) -> Option<Backend> {
    match cfg.backend {
        BackendKind::Exact => Some(Backend::Exact(cfg.exact)),
        BackendKind::Greedy => Some(Backend::Greedy),
        BackendKind::Export => None,
    }
}

fn is_degraded(status: SolveStatus) -> bool {
    matches!(status, SolveStatus::BoundGap(_))
}

struct Writer<'a> {
    dir: PathBuf,
    hash: &'a str,
    out: StageOutput,
}

impl<'a> Writer<'a> {
    fn new(cfg: &RunConfig, hash: &'a str) -> Self {
        Writer {
            dir: cfg.out_path(),
            hash,
            out: StageOutput::default(),
        }
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_text(&path, text)?;
        self.out.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.text(name, &text)
    }

    fn with_hash(&self, mut v: serde_json::Value) -> serde_json::Value {
        v["config_hash"] = json!(self.hash);
        v
    }
}

/// Writes `effective_config.json` into the output directory.
pub fn write_effective_config(cfg: &RunConfig) -> Result<PathBuf> {
    let path = cfg.out_path().join("effective_config.json");
    let mut text = serde_json::to_string_pretty(&cfg.effective_json()).expect("config serializes");
    text.push('\n');
    write_text(&path, &text)?;
    Ok(path)
}

/// Checks the configuration and the input files' schemas and returns the
/// effective parameter block with derived constants and the config hash.
pub fn validate(cfg: &RunConfig) -> Result<serde_json::Value> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let thresholds: Vec<_> = cfg
        .altitudes_m
        .iter()
        .map(|&h| {
            json!({
                "altitude_m": h,
                "min_qualifying_capacity_mw": min_qualifying_capacity(&cfg.beam_params, h),
                "qualified_farms": qualify_farms(&inputs.farms, &cfg.beam_params, h).len(),
            })
        })
        .collect();
    Ok(json!({
        "config_hash": inputs.config_hash,
        "eta_sys": end_to_end_efficiency(&cfg.beam_params),
        "p_cruise_mw": cruise_power(&cfg.aircraft_params),
        "net_rate_per_mwh": rates(cfg).net_rate(),
        "altitudes": thresholds,
        "ingest": {
            "airports": inputs.airport_report,
            "flights": inputs.flight_report,
            "farms": inputs.farm_report,
        },
        "effective_config": cfg.effective_json(),
    }))
}

/// Qualifies farms, discretizes flights and loads or computes the shifted
/// coverage set for one altitude. The cache lives under `{out}/cache/`.
pub fn prepare_altitude(cfg: &RunConfig, inputs: &Inputs, altitude_m: f64) -> Result<AltitudeData> {
    let qualified = qualify_farms(&inputs.farms, &cfg.beam_params, altitude_m);
    let trajectories = inputs
        .flights
        .iter()
        .map(|f| discretize_flight(f, &inputs.airports, altitude_m, cfg.dt_s))
        .collect::<Result<Vec<_>>>()?;
    let grid = build_time_grid(&inputs.flights, cfg.dt_s, cfg.tau_max_s)?;
    let shifts = ShiftSet::new(cfg.tau_max_s, cfg.dt_s)?;
    let key = coverage_key(&trajectories, &qualified, &grid, Some(&shifts), &cfg.beam_params);
    let cache_path = cfg
        .out_path()
        .join("cache")
        .join(format!("{}_{}_coverage.bin", cfg.run_id, altitude_tag(altitude_m)));
    let (coverage, cache_hit) = match read_cache(&cache_path, &key) {
        Ok(set) => (set, true),
        Err(e) => {
            if cache_path.exists() {
                log::warn!("recomputing coverage: {e}");
            }
            let set = compute_coverage(&trajectories, &qualified, &grid, Some(&shifts), &cfg.beam_params)?;
            write_cache(&cache_path, &set, &key)?;
            (set, false)
        }
    };
    log::info!(
        "h={altitude_m} m: {} qualified farms, {} coverage entries{}",
        qualified.len(),
        coverage.entries.len(),
        if cache_hit { " (cached)" } else { "" }
    );
    Ok(AltitudeData {
        altitude_m,
        qualified,
        trajectories,
        grid,
        coverage,
        cache_hit,
        cache_path,
    })
}

/// Coverage for every configured altitude, plus a summary per altitude.
pub fn run_coverage(cfg: &RunConfig) -> Result<StageOutput> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let mut w = Writer::new(cfg, &inputs.config_hash);
    w.out.files.push(write_effective_config(cfg)?);
    for &h in &cfg.altitudes_m {
        let data = prepare_altitude(cfg, &inputs, h)?;
        w.out.files.push(data.cache_path.clone());
        let summary = w.with_hash(json!({
            "altitude_m": h,
            "qualified_farms": data.qualified.len(),
            "flights": data.trajectories.len(),
            "time_steps": data.grid.n_steps,
            "shifts": data.coverage.shift_values().len(),
            "coverage_entries": data.coverage.entries.len(),
            "zero_shift_entries": data.coverage.entries.iter().filter(|e| e.shift == 0).count(),
        }));
        w.json(&format!("{}_{}_coverage.json", cfg.run_id, altitude_tag(h)), &summary)?;
    }
    Ok(w.out)
}

fn savings_by_key(ctx: &ReportContext, sol: &Solution, dim: Dimension) -> BTreeMap<String, SavingsBreakdown> {
    ctx.aggregate(sol, dim)
        .rows
        .into_iter()
        .map(|r| (r.key, r.savings))
        .collect()
}

fn write_cuts(w: &mut Writer, ctx: &ReportContext, sol: &Solution, prefix: &str) -> Result<()> {
    for dim in Dimension::ALL {
        let agg = ctx.aggregate(sol, dim);
        let csv = rows_csv(&agg.rows, w.hash);
        w.text(&format!("{prefix}_{}.csv", dim.name()), &csv)?;
    }
    Ok(())
}

fn export_format_ext(f: ModelFormat) -> &'static str {
    match f {
        ModelFormat::Lp => "lp",
        ModelFormat::Mps => "mps",
    }
}

fn export(w: &mut Writer, cfg: &RunConfig, built: &crate::optimize::BuiltModel, stem: &str) -> Result<()> {
    let path = w.dir.join(format!("{stem}.{}", export_format_ext(cfg.export_format)));
    export_model(&built.model, &path, cfg.export_format)?;
    w.out.files.push(path);
    Ok(())
}

/// Shift optimization at every altitude, with the zero-shift baseline for
/// comparison. The export backend writes the models instead of solving.
pub fn run_schedule(cfg: &RunConfig) -> Result<StageOutput> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let opts = cfg.model_options();
    let mut out = StageOutput::default();
    out.files.push(write_effective_config(cfg)?);
    for &h in &cfg.altitudes_m {
        let data = prepare_altitude(cfg, &inputs, h)?;
        let net = data.network(cfg, &inputs, true)?;
        let prefix = format!("{}_{}_schedule", cfg.run_id, altitude_tag(h));
        let mut w = Writer::new(cfg, &inputs.config_hash);
        let Some(backend) = backend(cfg) else {
            export(&mut w, cfg, &build_schedule_model(&net, &opts)?, &prefix)?;
            out.merge(w.out);
            continue;
        };
        let sol = solve_schedule(&net, &backend, &opts)?;
        let baseline = solve_schedule(&net.zero_shift_baseline()?, &backend, &opts)?;
        w.out.degraded |= is_degraded(sol.status) || is_degraded(baseline.status);
        let summary = ShiftSummary::new(&sol.shifts_chosen, cfg.dt_s);
        w.json(&format!("{prefix}_solution.json"), &sol)?;
        w.json(&format!("{prefix}_baseline.json"), &baseline)?;
        w.text(&format!("{prefix}_shifts.json"), &shift_summary_json(&summary, w.hash))?;
        let record = w.with_hash(json!({
            "altitude_m": h,
            "qualified_farms": data.qualified.len(),
            "flights": net.n_flights(),
            "z_opt": sol.objective,
            "z_baseline": baseline.objective,
            "status": sol.status,
            "baseline_status": baseline.status,
            "energy_mwh": sol.energy_mwh(),
            "beaming_min": sol.beaming_minutes(),
            "baseline_energy_mwh": baseline.energy_mwh(),
            "baseline_beaming_min": baseline.beaming_minutes(),
            "savings": sol.savings,
            "baseline_savings": baseline.savings,
            "shifted_flights": sol.shifted_flights(),
        }));
        w.json(&format!("{prefix}_summary.json"), &record)?;
        let ctx = data.report_context(cfg, &inputs);
        write_cuts(&mut w, &ctx, &sol, &prefix)?;
        let farm_savings = savings_by_key(&ctx, &sol, Dimension::Farm);
        let flight_savings = savings_by_key(&ctx, &sol, Dimension::Flight);
        let farms = farms_geojson(&ctx.farms, &farm_savings, None, w.hash);
        w.text(&format!("{prefix}_farms.geojson"), &farms)?;
        let flights = flights_geojson(&ctx.flights, &flight_savings, Some(&sol.shifts_chosen), None, w.hash);
        w.text(&format!("{prefix}_flights.geojson"), &flights)?;
        out.merge(w.out);
    }
    Ok(out)
}

fn scenario_label(p: &Penetration) -> String {
    format!("farm{:.2}_flight{:.2}", p.rho_farm, p.rho_flight)
}

/// Equipment choice over the penetration grid at every altitude.
pub fn run_choice(cfg: &RunConfig) -> Result<StageOutput> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let opts = cfg.model_options();
    let grid = cfg.penetration_grid();
    let mut out = StageOutput::default();
    out.files.push(write_effective_config(cfg)?);
    for &h in &cfg.altitudes_m {
        let data = prepare_altitude(cfg, &inputs, h)?;
        let net = data.network(cfg, &inputs, false)?;
        let prefix = format!("{}_{}_choice", cfg.run_id, altitude_tag(h));
        let mut w = Writer::new(cfg, &inputs.config_hash);
        let Some(backend) = backend(cfg) else {
            for pen in &grid {
                let built = build_choice_model(&net, *pen, &opts)?;
                export(&mut w, cfg, &built, &format!("{prefix}_{}", scenario_label(pen)))?;
            }
            out.merge(w.out);
            continue;
        };
        let sweep = penetration_sweep(&net, &grid, &backend, &opts);
        for s in &sweep.scenarios {
            match &s.result {
                Ok(sol) => w.out.degraded |= is_degraded(sol.status),
                Err(msg) => {
                    log::warn!("scenario {} failed: {msg}", scenario_label(&s.penetration));
                    w.out.degraded = true;
                }
            }
        }
        let ctx = data.report_context(cfg, &inputs);
        let surface = surface_csv(&sweep, net.n_farms(), net.n_flights(), w.hash);
        w.text(&format!("{prefix}_surface.csv"), &surface)?;
        let solved = sweep
            .scenarios
            .iter()
            .filter_map(|s| s.result.as_ref().ok().map(|sol| (s.penetration, sol)))
            .collect::<Vec<_>>();
        let freq = frequency_csv(&sweep.farm_frequency, &ctx.farms, solved.len(), w.hash);
        w.text(&format!("{prefix}_farm_frequency.csv"), &freq)?;
        let scen = aggregate_scenarios(solved.iter().map(|(p, sol)| (scenario_label(p), *sol)));
        w.text(&format!("{prefix}_scenario.csv"), &rows_csv(&scen.rows, w.hash))?;
        // Maps show the highest-penetration solved scenario.
        if let Some((pen, sol)) = solved.last() {
            write_cuts(&mut w, &ctx, sol, &format!("{prefix}_{}", scenario_label(pen)))?;
            let farm_savings = savings_by_key(&ctx, sol, Dimension::Farm);
            let flight_savings = savings_by_key(&ctx, sol, Dimension::Flight);
            let farms = farms_geojson(&ctx.farms, &farm_savings, Some(&sweep.farm_frequency), w.hash);
            w.text(&format!("{prefix}_farms.geojson"), &farms)?;
            let flights = flights_geojson(&ctx.flights, &flight_savings, None, Some(&sol.selected_flights), w.hash);
            w.text(&format!("{prefix}_selected_flights.geojson"), &flights)?;
        }
        let record = w.with_hash(json!({
            "altitude_m": h,
            "qualified_farms": data.qualified.len(),
            "flights": net.n_flights(),
            "scenarios": sweep.scenarios.len(),
            "solved": solved.len(),
            "max_objective": solved.iter().map(|(_, s)| s.objective).fold(0.0, f64::max),
        }));
        w.json(&format!("{prefix}_summary.json"), &record)?;
        out.merge(w.out);
    }
    Ok(out)
}

/// Writes the MILP for every altitude (and, for the choice problem, every
/// grid point) without solving.
pub fn run_export(cfg: &RunConfig, problem: ProblemChoice) -> Result<StageOutput> {
    let cfg = RunConfig {
        backend: BackendKind::Export,
        ..cfg.clone()
    };
    match problem {
        ProblemChoice::Schedule => run_schedule(&cfg),
        ProblemChoice::Choice => run_choice(&cfg),
    }
}

/// Re-reports a plan at the first configured altitude. `solution` is either
/// a solution JSON written by this tool or an external solver's values file
/// for the model `export-model` wrote; both are validated before reporting.
pub fn run_report(cfg: &RunConfig, solution: &Path, problem: ProblemChoice) -> Result<StageOutput> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let opts = cfg.model_options();
    let h = cfg.altitudes_m[0];
    let data = prepare_altitude(cfg, &inputs, h)?;
    let text = fs::read_to_string(solution).map_err(|e| Error::io(solution, e))?;
    let sol = match serde_json::from_str::<Solution>(&text) {
        Ok(sol) => {
            let net = data.network(cfg, &inputs, matches!(sol.problem, ProblemKind::Schedule))?;
            validate_solution(&net, &opts, &sol).map_err(Error::Rejected)?;
            sol
        }
        Err(_) => {
            let (net, built) = match problem {
                ProblemChoice::Schedule => {
                    let net = data.network(cfg, &inputs, true)?;
                    let built = build_schedule_model(&net, &opts)?;
                    (net, built)
                }
                ProblemChoice::Choice => {
                    let pen = Penetration::new(cfg.penetration.rho_farm[0], cfg.penetration.rho_flight[0])?;
                    let net = data.network(cfg, &inputs, false)?;
                    let built = build_choice_model(&net, pen, &opts)?;
                    (net, built)
                }
            };
            import_solution(&built, &net, solution)?
        }
    };
    let mut w = Writer::new(cfg, &inputs.config_hash);
    let prefix = format!("{}_{}_report", cfg.run_id, altitude_tag(h));
    let ctx = data.report_context(cfg, &inputs);
    write_cuts(&mut w, &ctx, &sol, &prefix)?;
    let record = w.with_hash(json!({
        "altitude_m": h,
        "source": solution.display().to_string(),
        "objective": sol.objective,
        "status": sol.status,
        "savings": sol.savings,
    }));
    w.json(&format!("{prefix}_summary.json"), &record)?;
    w.out.degraded = is_degraded(sol.status);
    Ok(w.out)
}
