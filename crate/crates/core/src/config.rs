//! JSON run configuration, its validation, and the content hash stamped on
//! every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::economics::EconomicParams;
use crate::error::{Error, Result};
use crate::ingest::ColumnNames;
use crate::optimize::{ExactOptions, ModelFormat, ModelOptions, Penetration};
use crate::physics::{cruise_power, AircraftParams, BeamParams};
use crate::report::DayNightMode;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputPaths {
    pub flights: PathBuf,
    pub airports: PathBuf,
    pub farms: PathBuf,
    pub airport_states: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Exact,
    Greedy,
    Export,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(BackendKind::Exact),
            "greedy" => Ok(BackendKind::Greedy),
            "export" => Ok(BackendKind::Export),
            other => Err(format!("unknown backend `{other}` (exact, greedy, export)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenetrationGrid {
    pub rho_farm: Vec<f64>,
    pub rho_flight: Vec<f64>,
}

impl Default for PenetrationGrid {
    fn default() -> Self {
        let tenths: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        PenetrationGrid {
            rho_farm: tenths.clone(),
            rho_flight: tenths,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    pub cap_received_at_cruise: bool,
    pub single_target_per_farm: bool,
    pub day_night_mode: DayNightMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run_id: String,
    /// Relative paths are resolved against the config file's directory.
    pub inputs: InputPaths,
    pub columns: ColumnNames,
    pub dt_s: i64,
    pub tau_max_s: i64,
    pub altitudes_m: Vec<f64>,
    pub beam_params: BeamParams,
    pub aircraft_params: AircraftParams,
    pub economic_params: EconomicParams,
    pub backend: BackendKind,
    pub penetration: PenetrationGrid,
    pub out_dir: PathBuf,
    /// Echoed into artifacts; every stage is deterministic.
    pub seed: u64,
    pub exact: ExactOptions,
    pub flags: Flags,
    pub export_format: ModelFormat,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run_id: "run".into(),
            inputs: InputPaths::default(),
            columns: ColumnNames::default(),
            dt_s: 60,
            tau_max_s: 1800,
            altitudes_m: vec![12_100.0],
            beam_params: BeamParams::default(),
            aircraft_params: AircraftParams::default(),
            economic_params: EconomicParams::default(),
            backend: BackendKind::Exact,
            penetration: PenetrationGrid::default(),
            out_dir: PathBuf::from("out"),
            seed: 0,
            exact: ExactOptions::default(),
            flags: Flags::default(),
            export_format: ModelFormat::Lp,
            base_dir: PathBuf::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn flights_path(&self) -> PathBuf {
        self.resolve(&self.inputs.flights)
    }

    pub fn airports_path(&self) -> PathBuf {
        self.resolve(&self.inputs.airports)
    }

    pub fn farms_path(&self) -> PathBuf {
        self.resolve(&self.inputs.farms)
    }

    pub fn airport_states_path(&self) -> Option<PathBuf> {
        self.inputs.airport_states.as_deref().map(|p| self.resolve(p))
    }

    pub fn out_path(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            layout: Default::default(),
            cruise_cap_mw: self
                .flags
                .cap_received_at_cruise
                .then(|| cruise_power(&self.aircraft_params)),
            single_target_per_farm: self.flags.single_target_per_farm,
        }
    }

    pub fn penetration_grid(&self) -> Vec<Penetration> {
        crate::optimize::penetration_grid(&self.penetration.rho_farm, &self.penetration.rho_flight)
    }

    /// Every problem with the configuration, reported together.
    pub fn problems(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.run_id.is_empty() || !self.run_id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            errs.push(format!("run_id `{}` must be a non-empty file-name-safe token", self.run_id));
        }
        for (name, p) in [
            ("flights", Some(self.flights_path())),
            ("airports", Some(self.airports_path())),
            ("farms", Some(self.farms_path())),
            ("airport_states", self.airport_states_path()),
        ] {
            match p {
                Some(p) if p.as_os_str().is_empty() || p == self.base_dir => {
                    errs.push(format!("inputs.{name} is not set"))
                }
                Some(p) if !p.is_file() => errs.push(format!("inputs.{name}: file not found: {}", p.display())),
                _ => {}
            }
        }
        if self.dt_s <= 0 {
            errs.push(format!("dt_s must be positive, got {}", self.dt_s));
        } else if self.tau_max_s < 0 || self.tau_max_s % self.dt_s != 0 {
            errs.push(format!(
                "tau_max_s ({}) must be a non-negative multiple of dt_s ({})",
                self.tau_max_s, self.dt_s
            ));
        }
        if self.altitudes_m.is_empty() {
            errs.push("altitudes_m must list at least one altitude".into());
        }
        for &h in &self.altitudes_m {
            if !(h > 0.0 && h.is_finite()) {
                errs.push(format!("altitudes_m: {h} is not a positive altitude"));
            }
        }
        for r in [
            self.beam_params.validate(),
            self.aircraft_params.validate(),
            self.economic_params.validate(),
        ] {
            if let Err(e) = r {
                errs.push(e.to_string().trim_start_matches("invalid configuration: ").to_owned());
            }
        }
        if self.penetration.rho_farm.is_empty() || self.penetration.rho_flight.is_empty() {
            errs.push("penetration grid must be non-empty on both axes".into());
        }
        for &r in self.penetration.rho_farm.iter().chain(&self.penetration.rho_flight) {
            if !(0.0..=1.0).contains(&r) {
                errs.push(format!("penetration rate {r} outside [0, 1]"));
            }
        }
        if !(self.exact.gap_tol >= 0.0) {
            errs.push(format!("exact.gap_tol must be >= 0, got {}", self.exact.gap_tol));
        }
        if self.exact.time_limit_s.is_some_and(|t| !(t > 0.0)) {
            errs.push("exact.time_limit_s must be positive".into());
        }
        if self.exact.size_cap == 0 {
            errs.push("exact.size_cap must be positive".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.problems();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }

    /// The configuration with defaults filled in, as written next to outputs.
    pub fn effective_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 over the effective configuration (output directory excluded)
    /// and the bytes of every input file.
    pub fn config_hash(&self) -> String {
        let mut v = self.effective_json();
        v.as_object_mut().expect("config is an object").remove("out_dir");
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&v).expect("config serializes"));
        let inputs = [
            Some(self.flights_path()),
            Some(self.airports_path()),
            Some(self.farms_path()),
            self.airport_states_path(),
        ];
        for p in inputs.into_iter().flatten() {
            h.update([0u8]);
            if let Ok(bytes) = fs::read(&p) {
                h.update((bytes.len() as u64).to_le_bytes());
                h.update(bytes);
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let sparse: RunConfig = serde_json::from_str(r#"{"dt_s": 120}"#).unwrap();
        assert_eq!(sparse.dt_s, 120);
        assert_eq!(sparse.tau_max_s, 1800);
        assert_eq!(sparse.penetration.rho_farm.len(), 10);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"dt": 60}"#).is_err());
    }

    #[test]
    fn problems_are_aggregated() {
        let cfg = RunConfig {
            dt_s: 0,
            altitudes_m: vec![-1.0],
            ..RunConfig::default()
        };
        let errs = cfg.problems();
        assert!(errs.iter().any(|e| e.contains("dt_s")));
        assert!(errs.iter().any(|e| e.contains("altitudes_m")));
        assert!(errs.iter().any(|e| e.contains("inputs.flights")));
    }

    #[test]
    fn hash_ignores_out_dir() {
        let a = RunConfig::default();
        let b = RunConfig {
            out_dir: "elsewhere".into(),
            ..RunConfig::default()
        };
        let c = RunConfig {
            dt_s: 30,
            ..RunConfig::default()
        };
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
    }
}
