//! CSV and GeoJSON writers. Every artifact carries the run's config hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{classify_range, AggRow, FarmMeta, FlightMeta};
use crate::economics::SavingsBreakdown;
use crate::error::{Error, Result};
use crate::geo::GreatCircleArc;
use crate::optimize::{Solution, SweepResult};

const ROW_HEADER: [&str; 8] = [
    "key",
    "energy_mwh",
    "duration_min",
    "fuel_saving",
    "co2_saving",
    "elec_cost",
    "co2_kg_avoided",
    "total",
];

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_text(config_hash: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records");
    format!("# config_hash={config_hash}\n{body}")
}

fn breakdown_fields(s: &SavingsBreakdown) -> [String; 7] {
    [
        s.energy_mwh,
        s.duration_min,
        s.fuel_saving,
        s.co2_saving,
        s.elec_cost,
        s.co2_kg_avoided,
        s.total,
    ]
    .map(|v| (v + 0.0).to_string())
}

/// Aggregation rows with a fixed column order.
pub fn rows_csv(rows: &[AggRow], config_hash: &str) -> String {
    csv_text(
        config_hash,
        &ROW_HEADER,
        rows.iter().map(|r| {
            let mut rec = vec![r.key.clone()];
            rec.extend(breakdown_fields(&r.savings));
            rec
        }),
    )
}

/// Parses text written by [`rows_csv`].
pub fn read_rows_csv(text: &str) -> Result<Vec<AggRow>> {
    let origin = Path::new("<rows>");
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::format(origin, e.to_string()))?.clone();
    if header.iter().ne(ROW_HEADER) {
        return Err(Error::format(origin, format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::format(origin, e.to_string()))?;
        let v: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|e| Error::format(origin, format!("{s}: {e}"))))
            .collect::<Result<_>>()?;
        out.push(AggRow {
            key: rec[0].to_owned(),
            savings: SavingsBreakdown {
                energy_mwh: v[0],
                duration_min: v[1],
                fuel_saving: v[2],
                co2_saving: v[3],
                elec_cost: v[4],
                co2_kg_avoided: v[5],
                total: v[6],
            },
        });
    }
    Ok(out)
}

/// One row per penetration scenario.
pub fn surface_csv(sweep: &SweepResult, n_farms: usize, n_flights: usize, config_hash: &str) -> String {
    let header = [
        "rho_farm",
        "rho_flight",
        "farms_equipped",
        "flights_equipped",
        "status",
        "energy_mwh",
        "duration_min",
        "fuel_saving",
        "co2_saving",
        "elec_cost",
        "co2_kg_avoided",
        "total",
        "error",
    ];
    csv_text(
        config_hash,
        &header,
        sweep.scenarios.iter().map(|s| {
            let p = s.penetration;
            let mut rec = vec![
                p.rho_farm.to_string(),
                p.rho_flight.to_string(),
                p.farm_count(n_farms).to_string(),
                p.flight_count(n_flights).to_string(),
            ];
            match &s.result {
                Ok(sol) => {
                    rec.push(status_label(sol));
                    rec.extend(breakdown_fields(&sol.savings));
                    rec.push(String::new());
                }
                Err(e) => {
                    rec.push("error".into());
                    rec.extend(std::iter::repeat_n(String::new(), 7));
                    rec.push(e.clone());
                }
            }
            rec
        }),
    )
}

fn status_label(sol: &Solution) -> String {
    serde_json::to_value(sol.status)
        .ok()
        .and_then(|v| v.get("status").and_then(Value::as_str).map(str::to_owned))
        .unwrap_or_default()
}

/// How often each farm was equipped across a sweep.
pub fn frequency_csv(frequency: &[u32], farms: &[FarmMeta], scenarios: usize, config_hash: &str) -> String {
    let header = ["farm_id", "name", "state", "capacity_mw", "selected", "scenarios", "share"];
    let mut order: Vec<usize> = (0..farms.len()).collect();
    order.sort_by(|&a, &b| frequency[b].cmp(&frequency[a]).then(a.cmp(&b)));
    csv_text(
        config_hash,
        &header,
        order.into_iter().map(|f| {
            let m = &farms[f];
            let share = if scenarios == 0 { 0.0 } else { frequency[f] as f64 / scenarios as f64 };
            vec![
                m.farm_id.clone(),
                m.name.clone(),
                m.state.clone().unwrap_or_default(),
                m.capacity_mw.to_string(),
                frequency[f].to_string(),
                scenarios.to_string(),
                share.to_string(),
            ]
        }),
    )
}

fn collection(features: Vec<Value>, config_hash: &str) -> String {
    let v = json!({
        "type": "FeatureCollection",
        "config_hash": config_hash,
        "features": features,
    });
    serde_json::to_string_pretty(&v).expect("json values serialize")
}

/// Farm points with capacity, savings and (for sweeps) selection counts.
pub fn farms_geojson(
    farms: &[FarmMeta],
    savings: &BTreeMap<String, SavingsBreakdown>,
    frequency: Option<&[u32]>,
    config_hash: &str,
) -> String {
    let features = farms
        .iter()
        .enumerate()
        .map(|(f, m)| {
            let s = savings.get(&m.farm_id).copied().unwrap_or_default();
            let mut props = json!({
                "farm_id": m.farm_id,
                "name": m.name,
                "state": m.state,
                "county": m.county,
                "capacity_mw": m.capacity_mw,
                "energy_mwh": s.energy_mwh,
                "total_saving": s.total,
            });
            if let Some(freq) = frequency {
                props["selection_frequency"] = json!(freq[f]);
            }
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [m.location.lon, m.location.lat]},
                "properties": props,
            })
        })
        .collect();
    collection(features, config_hash)
}

const PATH_SEGMENTS: usize = 32;

/// Flight great-circle paths with range class and savings. `only` limits
/// the output to the listed flights.
pub fn flights_geojson(
    flights: &[FlightMeta],
    savings: &BTreeMap<String, SavingsBreakdown>,
    shifts: Option<&[i32]>,
    only: Option<&[usize]>,
    config_hash: &str,
) -> String {
    let indices: Vec<usize> = match only {
        Some(list) => list.to_vec(),
        None => (0..flights.len()).collect(),
    };
    let features = indices
        .into_iter()
        .map(|i| {
            let m = &flights[i];
            let coords: Vec<[f64; 2]> = match GreatCircleArc::new(m.origin_point, m.destination_point) {
                Ok(arc) => (0..=PATH_SEGMENTS)
                    .map(|k| {
                        let p = arc.point_at(k as f64 / PATH_SEGMENTS as f64);
                        [p.lon, p.lat]
                    })
                    .collect(),
                Err(_) => vec![
                    [m.origin_point.lon, m.origin_point.lat],
                    [m.destination_point.lon, m.destination_point.lat],
                ],
            };
            let s = savings.get(&m.flight_id).copied().unwrap_or_default();
            let mut props = json!({
                "flight_id": m.flight_id,
                "origin": m.origin,
                "destination": m.destination,
                "distance_km": m.distance_km,
                "range_class": classify_range(m.distance_km).label(),
                "energy_mwh": s.energy_mwh,
                "total_saving": s.total,
            });
            if let Some(sh) = shifts {
                props["shift_steps"] = json!(sh[i]);
            }
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": props,
            })
        })
        .collect();
    collection(features, config_hash)
}

/// Distribution of chosen departure shifts, in minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSummary {
    pub flights: usize,
    pub affected: usize,
    pub min_min: f64,
    pub q1_min: f64,
    pub median_min: f64,
    pub q3_min: f64,
    pub max_min: f64,
    /// Flights per shift (minutes).
    pub histogram: BTreeMap<i64, usize>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl ShiftSummary {
    pub fn new(shifts: &[i32], dt_s: i64) -> Self {
        let mut minutes: Vec<f64> = shifts.iter().map(|&s| s as f64 * dt_s as f64 / 60.0).collect();
        minutes.sort_by(f64::total_cmp);
        let mut histogram = BTreeMap::new();
        for &s in shifts {
            *histogram.entry(s as i64 * dt_s / 60).or_insert(0) += 1;
        }
        ShiftSummary {
            flights: shifts.len(),
            affected: shifts.iter().filter(|&&s| s != 0).count(),
            min_min: minutes.first().copied().unwrap_or(0.0),
            q1_min: quantile(&minutes, 0.25),
            median_min: quantile(&minutes, 0.5),
            q3_min: quantile(&minutes, 0.75),
            max_min: minutes.last().copied().unwrap_or(0.0),
            histogram,
        }
    }
}

pub fn shift_summary_json(summary: &ShiftSummary, config_hash: &str) -> String {
    let mut v = serde_json::to_value(summary).expect("summary serializes");
    v["config_hash"] = json!(config_hash);
    serde_json::to_string_pretty(&v).expect("json values serialize")
}
