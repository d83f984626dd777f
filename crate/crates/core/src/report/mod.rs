//! Aggregation of plans into reporting cuts: range class, day or night,
//! origin/destination/farm state, farm, and scenario.

mod emit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use emit::{
    farms_geojson, flights_geojson, read_rows_csv, rows_csv, shift_summary_json, surface_csv, frequency_csv,
    write_text, ShiftSummary,
};

use crate::coverage::TimeGrid;
use crate::economics::{Rates, SavingsBreakdown};
use crate::geo::GroundPoint;
use crate::optimize::Solution;

pub const UNKNOWN: &str = "UNKNOWN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    Short,
    Medium,
    Long,
}

impl RangeClass {
    pub fn label(self) -> &'static str {
        match self {
            RangeClass::Short => "short",
            RangeClass::Medium => "medium",
            RangeClass::Long => "long",
        }
    }
}

/// Short below 1,500 km, medium from 1,500 km up to and including 4,000 km,
/// long beyond.
pub fn classify_range(distance_km: f64) -> RangeClass {
    if distance_km < 1500.0 {
        RangeClass::Short
    } else if distance_km <= 4000.0 {
        RangeClass::Medium
    } else {
        RangeClass::Long
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayNightMode {
    /// Solar time at the serving farm's longitude.
    #[default]
    FarmLocal,
    /// The origin airport's clock.
    OriginLocal,
}

/// Daytime is local hour in `[6, 18)`.
pub fn is_daytime(t_utc: i64, offset_hours: f64) -> bool {
    let local = t_utc as f64 + offset_hours * 3600.0;
    let hour = local.rem_euclid(86_400.0) / 3600.0;
    (6.0..18.0).contains(&hour)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightMeta {
    pub flight_id: String,
    pub origin: String,
    pub destination: String,
    pub origin_point: GroundPoint,
    pub destination_point: GroundPoint,
    pub origin_utc_offset_hours: f64,
    pub origin_state: Option<String>,
    pub destination_state: Option<String>,
    pub distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmMeta {
    pub farm_id: String,
    pub name: String,
    pub state: Option<String>,
    pub county: String,
    pub location: GroundPoint,
    pub capacity_mw: f64,
}

/// Metadata joined onto solutions for every cut.
#[derive(Debug, Clone)]
pub struct ReportContext {
    pub grid: TimeGrid,
    pub flights: Vec<FlightMeta>,
    pub farms: Vec<FarmMeta>,
    pub rates: Rates,
    pub day_night_mode: DayNightMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    StateOrigin,
    StateDest,
    FarmState,
    RangeClass,
    DayNight,
    Farm,
    Flight,
}

impl Dimension {
    pub const ALL: [Dimension; 7] = [
        Dimension::StateOrigin,
        Dimension::StateDest,
        Dimension::FarmState,
        Dimension::RangeClass,
        Dimension::DayNight,
        Dimension::Farm,
        Dimension::Flight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::StateOrigin => "state_origin",
            Dimension::StateDest => "state_dest",
            Dimension::FarmState => "farm_state",
            Dimension::RangeClass => "range_class",
            Dimension::DayNight => "day_night",
            Dimension::Farm => "farm",
            Dimension::Flight => "flight",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggRow {
    pub key: String,
    pub savings: SavingsBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregation {
    pub dimension: String,
    pub rows: Vec<AggRow>,
    /// Energy samples grouped under [`UNKNOWN`] for lack of metadata.
    pub unknown: usize,
}

/// One slice of received energy attributed to a serving farm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySlice {
    pub farm: usize,
    pub flight: usize,
    pub t: usize,
    pub energy_mwh: f64,
    pub duration_min: f64,
}

/// Splits each received sample across its serving farms in proportion to
/// delivered power, so slices sum exactly to the plan's energy and
/// beaming time.
pub fn energy_slices(sol: &Solution, dt_s: i64) -> Vec<EnergySlice> {
    let dt_h = dt_s as f64 / 3600.0;
    let dt_min = dt_s as f64 / 60.0;
    let mut by_receiver: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for a in &sol.allocations {
        by_receiver.entry((a.flight, a.t)).or_default().push((a.farm, a.delivered_mw));
    }
    let mut out = Vec::new();
    for r in &sol.received {
        let minutes = if r.beaming { dt_min } else { 0.0 };
        let energy = r.power_mw * dt_h;
        let parts = by_receiver.get(&(r.flight, r.t)).map(Vec::as_slice).unwrap_or(&[]);
        let total: f64 = parts.iter().map(|p| p.1).sum();
        if parts.is_empty() || total <= 0.0 {
            continue;
        }
        for &(farm, d) in parts {
            let share = d / total;
            out.push(EnergySlice {
                farm,
                flight: r.flight,
                t: r.t,
                energy_mwh: energy * share,
                duration_min: minutes * share,
            });
        }
    }
    out
}

/// Day or night energy per flight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DayNight {
    pub day_mwh: f64,
    pub night_mwh: f64,
    pub day_min: f64,
    pub night_min: f64,
}

impl ReportContext {
    fn slice_is_day(&self, s: &EnergySlice) -> bool {
        let t_utc = self.grid.time_of(s.t);
        match self.day_night_mode {
            DayNightMode::FarmLocal => is_daytime(t_utc, self.farms[s.farm].location.lon / 15.0),
            DayNightMode::OriginLocal => is_daytime(t_utc, self.flights[s.flight].origin_utc_offset_hours),
        }
    }

    fn key_of(&self, dim: Dimension, s: &EnergySlice) -> Option<String> {
        let flight = &self.flights[s.flight];
        let farm = &self.farms[s.farm];
        match dim {
            Dimension::StateOrigin => flight.origin_state.clone(),
            Dimension::StateDest => flight.destination_state.clone(),
            Dimension::FarmState => farm.state.clone(),
            Dimension::RangeClass => Some(classify_range(flight.distance_km).label().to_owned()),
            Dimension::DayNight => Some(if self.slice_is_day(s) { "day" } else { "night" }.to_owned()),
            Dimension::Farm => Some(farm.farm_id.clone()),
            Dimension::Flight => Some(flight.flight_id.clone()),
        }
    }

    /// Per-flight split of received energy into day and night.
    pub fn day_night_split(&self, sol: &Solution) -> Vec<DayNight> {
        let mut out = vec![DayNight::default(); self.flights.len()];
        for s in energy_slices(sol, self.grid.dt_s) {
            let d = &mut out[s.flight];
            if self.slice_is_day(&s) {
                d.day_mwh += s.energy_mwh;
                d.day_min += s.duration_min;
            } else {
                d.night_mwh += s.energy_mwh;
                d.night_min += s.duration_min;
            }
        }
        out
    }

    /// Groups one plan's energy along `dim`. Rows are ordered by descending
    /// total saving, ties by key.
    pub fn aggregate(&self, sol: &Solution, dim: Dimension) -> Aggregation {
        let mut groups: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        let mut unknown = 0;
        for s in energy_slices(sol, self.grid.dt_s) {
            let key = self.key_of(dim, &s).unwrap_or_else(|| {
                unknown += 1;
                UNKNOWN.to_owned()
            });
            let g = groups.entry(key).or_default();
            g.0 += s.energy_mwh;
            g.1 += s.duration_min;
        }
        if unknown > 0 {
            log::warn!("{unknown} energy samples lack metadata for the {} cut", dim.name());
        }
        let rows = groups
            .into_iter()
            .map(|(key, (e, m))| AggRow {
                key,
                savings: self.rates.breakdown(e, m),
            })
            .collect();
        Aggregation {
            dimension: dim.name().to_owned(),
            rows: sort_rows(rows),
            unknown,
        }
    }
}

fn sort_rows(mut rows: Vec<AggRow>) -> Vec<AggRow> {
    rows.sort_by(|a, b| b.savings.total.total_cmp(&a.savings.total).then_with(|| a.key.cmp(&b.key)));
    rows
}

/// One row per labelled scenario, carrying that plan's totals.
pub fn aggregate_scenarios<'a>(scenarios: impl IntoIterator<Item = (String, &'a Solution)>) -> Aggregation {
    let rows = scenarios
        .into_iter()
        .map(|(key, sol)| AggRow {
            key,
            savings: sol.savings,
        })
        .collect();
    Aggregation {
        dimension: "scenario".into(),
        rows: sort_rows(rows),
        unknown: 0,
    }
}

/// Sum of every row; equals the plan's totals by construction.
pub fn grand_total(rows: &[AggRow]) -> SavingsBreakdown {
    rows.iter().fold(SavingsBreakdown::default(), |acc, r| acc + r.savings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_boundaries() {
        assert_eq!(classify_range(0.0), RangeClass::Short);
        assert_eq!(classify_range(1499.999), RangeClass::Short);
        assert_eq!(classify_range(1500.0), RangeClass::Medium);
        assert_eq!(classify_range(4000.0), RangeClass::Medium);
        assert_eq!(classify_range(4000.1), RangeClass::Long);
    }

    #[test]
    fn day_window_is_half_open() {
        let noon = 12 * 3600;
        assert!(is_daytime(noon, 0.0));
        assert!(is_daytime(6 * 3600, 0.0));
        assert!(!is_daytime(18 * 3600, 0.0));
        assert!(!is_daytime(3 * 3600, 0.0));
        // 17:00 UTC is noon at 75 W
        assert!(is_daytime(17 * 3600, -75.0 / 15.0));
        assert!(!is_daytime(23 * 3600, -75.0 / 15.0));
        assert!(is_daytime(-12 * 3600, 0.0));
    }
}
