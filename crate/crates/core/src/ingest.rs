//! Loaders for the flight, airport, and solar-farm datasets.
//!
//! Every loader returns the accepted records in input order together with an
//! [`IngestReport`]. Defective rows are skipped and counted, never repaired;
//! only unreadable files and missing columns are fatal.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geo::GroundPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub flight_id: String,
    pub origin: String,
    pub destination: String,
    /// Seconds since the Unix epoch, UTC.
    pub wheels_off_utc: i64,
    pub elapsed_s: i64,
}

impl FlightRecord {
    pub fn wheels_on_utc(&self) -> i64 {
        self.wheels_off_utc + self.elapsed_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Airport {
    pub code: String,
    pub lat: f64,
    pub lon: f64,
    pub utc_offset_hours: f64,
}

impl Airport {
    pub fn location(&self) -> GroundPoint {
        GroundPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

pub type AirportTable = BTreeMap<String, Airport>;

/// A polygon as a list of rings, outer ring first, each closed.
pub type Polygon = Vec<Vec<GroundPoint>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolarFarmRecord {
    pub farm_id: String,
    pub name: String,
    pub location: GroundPoint,
    pub dc_capacity_mw: f64,
    pub area_m2: f64,
    pub boundary: Option<Polygon>,
    pub state: String,
    pub county: String,
}

/// Per-loader row accounting.
///
/// `accepted` plus every rejection counter equals `total_rows`;
/// `geometry_defects` counts kept rows whose polygon was dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub total_rows: u64,
    pub accepted: u64,
    pub unparseable: u64,
    pub bad_elapsed: u64,
    pub unknown_airport: u64,
    pub same_endpoints: u64,
    pub duplicates: u64,
    pub out_of_range: u64,
    pub missing_capacity: u64,
    pub missing_area: u64,
    pub geometry_defects: u64,
}

impl IngestReport {
    pub fn rejected(&self) -> u64 {
        self.unparseable
            + self.bad_elapsed
            + self.unknown_airport
            + self.same_endpoints
            + self.duplicates
            + self.out_of_range
            + self.missing_capacity
            + self.missing_area
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlightColumns {
    pub flight_id: String,
    pub origin: String,
    pub dest: String,
    pub wheels_off_local: String,
    pub date: String,
    pub elapsed_min: String,
}

impl Default for FlightColumns {
    fn default() -> Self {
        FlightColumns {
            flight_id: "flight_id".into(),
            origin: "origin".into(),
            dest: "dest".into(),
            wheels_off_local: "wheels_off_local".into(),
            date: "date".into(),
            elapsed_min: "elapsed_min".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AirportColumns {
    pub code: String,
    pub lat: String,
    pub lon: String,
    pub utc_offset_hours: String,
}

impl Default for AirportColumns {
    fn default() -> Self {
        AirportColumns {
            code: "code".into(),
            lat: "lat".into(),
            lon: "lon".into(),
            utc_offset_hours: "utc_offset_hours".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FarmColumns {
    pub farm_id: String,
    pub name: String,
    pub lat: String,
    pub lon: String,
    pub capacity_mw_dc: String,
    pub area_m2: String,
    pub state: String,
    pub county: String,
}

impl Default for FarmColumns {
    fn default() -> Self {
        FarmColumns {
            farm_id: "farm_id".into(),
            name: "name".into(),
            lat: "lat".into(),
            lon: "lon".into(),
            capacity_mw_dc: "capacity_mw_dc".into(),
            area_m2: "area_m2".into(),
            state: "state".into(),
            county: "county".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnNames {
    pub flights: FlightColumns,
    pub airports: AirportColumns,
    pub farms: FarmColumns,
}

struct CsvTable {
    headers: Vec<String>,
    rows: Vec<Option<csv::StringRecord>>,
}

impl CsvTable {
    fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(bytes.as_slice());
        let headers = reader
            .headers()
            .map_err(|e| Error::format(path, e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        // A row that fails at the CSV level still counts as an input row.
        let rows = reader.records().map(|r| r.ok()).collect();
        Ok(CsvTable { headers, rows })
    }

    fn column(&self, path: &Path, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_owned(),
                column: name.to_owned(),
            })
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

fn field(row: &csv::StringRecord, idx: usize) -> Option<&str> {
    row.get(idx).filter(|s| !s.is_empty())
}

fn number(row: &csv::StringRecord, idx: usize) -> Option<f64> {
    field(row, idx)?.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Accepts `HH:MM`, `H:MM`, and the BTS `HHMM` form; `24:00` rolls over.
fn parse_clock(s: &str) -> Option<i64> {
    let (h, m) = match s.split_once(':') {
        Some((h, m)) => (h.parse::<i64>().ok()?, m.parse::<i64>().ok()?),
        None if s.len() >= 3 && s.len() <= 4 && s.bytes().all(|b| b.is_ascii_digit()) => {
            let v = s.parse::<i64>().ok()?;
            (v / 100, v % 100)
        }
        None => return None,
    };
    if !(0..=24).contains(&h) || !(0..60).contains(&m) || (h == 24 && m != 0) {
        return None;
    }
    Some(h * 3600 + m * 60)
}

pub fn load_airports(path: &Path, cols: &AirportColumns) -> Result<(AirportTable, IngestReport)> {
    let table = CsvTable::read(path)?;
    let ci = table.column(path, &cols.code)?;
    let la = table.column(path, &cols.lat)?;
    let lo = table.column(path, &cols.lon)?;
    let off = table.column(path, &cols.utc_offset_hours)?;

    let mut report = IngestReport::default();
    let mut airports = AirportTable::new();
    for row in &table.rows {
        report.total_rows += 1;
        let parsed = row.as_ref().and_then(|row| {
            Some((
                field(row, ci)?.to_owned(),
                number(row, la)?,
                number(row, lo)?,
                number(row, off)?,
            ))
        });
        let Some((code, lat, lon, utc_offset_hours)) = parsed else {
            report.unparseable += 1;
            continue;
        };
        if GroundPoint::new(lat, lon).is_err() {
            report.out_of_range += 1;
            continue;
        }
        if airports.contains_key(&code) {
            report.duplicates += 1;
            continue;
        }
        report.accepted += 1;
        airports.insert(
            code.clone(),
            Airport {
                code,
                lat,
                lon,
                utc_offset_hours,
            },
        );
    }
    Ok((airports, report))
}

pub fn load_flights(
    path: &Path,
    airports: &AirportTable,
    cols: &FlightColumns,
) -> Result<(Vec<FlightRecord>, IngestReport)> {
    let table = CsvTable::read(path)?;
    let fi = table.column(path, &cols.flight_id)?;
    let oi = table.column(path, &cols.origin)?;
    let di = table.column(path, &cols.dest)?;
    let wi = table.column(path, &cols.wheels_off_local)?;
    let ti = table.column(path, &cols.date)?;
    let ei = table.column(path, &cols.elapsed_min)?;

    let mut report = IngestReport::default();
    let mut flights = Vec::new();
    for row in &table.rows {
        report.total_rows += 1;
        let parsed = row.as_ref().and_then(|row| {
            let date = NaiveDate::parse_from_str(field(row, ti)?, "%Y-%m-%d").ok()?;
            let clock = parse_clock(field(row, wi)?)?;
            Some((
                field(row, fi)?.to_owned(),
                field(row, oi)?.to_owned(),
                field(row, di)?.to_owned(),
                date,
                clock,
                number(row, ei)?,
            ))
        });
        let Some((flight_id, origin, destination, date, clock, elapsed_min)) = parsed else {
            report.unparseable += 1;
            continue;
        };
        if elapsed_min <= 0.0 {
            report.bad_elapsed += 1;
            continue;
        }
        if origin == destination {
            report.same_endpoints += 1;
            continue;
        }
        let (Some(from), Some(_)) = (airports.get(&origin), airports.get(&destination)) else {
            report.unknown_airport += 1;
            continue;
        };
        let midnight = date.and_time(NaiveTime::MIN).and_utc().timestamp();
        let offset_s = (from.utc_offset_hours * 3600.0).round() as i64;
        report.accepted += 1;
        flights.push(FlightRecord {
            flight_id,
            origin,
            destination,
            wheels_off_utc: midnight + clock - offset_s,
            elapsed_s: (elapsed_min * 60.0).round() as i64,
        });
    }
    Ok((flights, report))
}

/// Loads `code,state` pairs used by the state-level report cuts.
pub fn load_airport_states(path: &Path) -> Result<BTreeMap<String, String>> {
    let table = CsvTable::read(path)?;
    let ci = table.column(path, "code")?;
    let si = table.column(path, "state")?;
    let mut out = BTreeMap::new();
    for row in table.rows.iter().flatten() {
        if let (Some(code), Some(state)) = (field(row, ci), field(row, si)) {
            out.entry(code.to_owned()).or_insert_with(|| state.to_owned());
        }
    }
    Ok(out)
}

/// Loads farms from CSV, or from a GeoJSON FeatureCollection when the file
/// content starts with `{`.
pub fn load_farms(path: &Path, cols: &FarmColumns) -> Result<(Vec<SolarFarmRecord>, IngestReport)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        load_farms_geojson(path, &text, cols)
    } else {
        load_farms_csv(path, cols)
    }
}

struct FarmFields {
    farm_id: Option<String>,
    name: String,
    lat: Option<f64>,
    lon: Option<f64>,
    capacity: Option<f64>,
    area: Option<f64>,
    state: String,
    county: String,
}

fn accept_farm(
    fields: FarmFields,
    geometry: Option<std::result::Result<GeometryShape, ()>>,
    report: &mut IngestReport,
) -> Option<SolarFarmRecord> {
    report.total_rows += 1;
    let Some(farm_id) = fields.farm_id else {
        report.unparseable += 1;
        return None;
    };
    match fields.capacity {
        Some(c) if c > 0.0 => {}
        _ => {
            report.missing_capacity += 1;
            return None;
        }
    }
    match fields.area {
        Some(a) if a > 0.0 => {}
        _ => {
            report.missing_area += 1;
            return None;
        }
    }
    let mut boundary = None;
    let mut geometry_point = None;
    let mut defect = false;
    match geometry {
        Some(Ok(GeometryShape::Polygon(rings))) => {
            geometry_point = Some(ring_centroid(&rings[0]));
            boundary = Some(rings);
        }
        Some(Ok(GeometryShape::Point(p))) => geometry_point = Some(p),
        Some(Err(())) => defect = true,
        None => {}
    }
    let location = match (fields.lat, fields.lon) {
        (Some(lat), Some(lon)) => match GroundPoint::new(lat, lon) {
            Ok(p) => p,
            Err(_) => {
                report.out_of_range += 1;
                return None;
            }
        },
        _ => match geometry_point {
            Some(p) => p,
            None => {
                report.unparseable += 1;
                return None;
            }
        },
    };
    report.accepted += 1;
    if defect {
        report.geometry_defects += 1;
    }
    Some(SolarFarmRecord {
        farm_id,
        name: fields.name,
        location,
        dc_capacity_mw: fields.capacity.unwrap_or_default(),
        area_m2: fields.area.unwrap_or_default(),
        boundary,
        state: fields.state,
        county: fields.county,
    })
}

fn load_farms_csv(path: &Path, cols: &FarmColumns) -> Result<(Vec<SolarFarmRecord>, IngestReport)> {
    let table = CsvTable::read(path)?;
    let idi = table.column(path, &cols.farm_id)?;
    let lai = table.column(path, &cols.lat)?;
    let loi = table.column(path, &cols.lon)?;
    let cai = table.column(path, &cols.capacity_mw_dc)?;
    let ari = table.column(path, &cols.area_m2)?;
    let ni = table.optional_column(&cols.name);
    let si = table.optional_column(&cols.state);
    let coi = table.optional_column(&cols.county);

    let mut report = IngestReport::default();
    let mut farms = Vec::new();
    for row in &table.rows {
        let Some(row) = row else {
            report.total_rows += 1;
            report.unparseable += 1;
            continue;
        };
        let text = |i: Option<usize>| i.and_then(|i| field(row, i)).unwrap_or_default().to_owned();
        let fields = FarmFields {
            farm_id: field(row, idi).map(str::to_owned),
            name: text(ni),
            lat: number(row, lai),
            lon: number(row, loi),
            capacity: number(row, cai),
            area: number(row, ari),
            state: text(si),
            county: text(coi),
        };
        farms.extend(accept_farm(fields, None, &mut report));
    }
    Ok((farms, report))
}

enum GeometryShape {
    Point(GroundPoint),
    Polygon(Polygon),
}

fn parse_position(v: &Value) -> Option<GroundPoint> {
    let arr = v.as_array()?;
    if arr.len() < 2 {
        return None;
    }
    GroundPoint::new(arr[1].as_f64()?, arr[0].as_f64()?).ok()
}

fn parse_ring(v: &Value) -> Option<Vec<GroundPoint>> {
    let ring = v.as_array()?.iter().map(parse_position).collect::<Option<Vec<_>>>()?;
    is_valid_ring(&ring).then_some(ring)
}

fn parse_geometry(v: &Value) -> std::result::Result<GeometryShape, ()> {
    let coords = v.get("coordinates").ok_or(())?;
    match v.get("type").and_then(Value::as_str) {
        Some("Point") => parse_position(coords).map(GeometryShape::Point).ok_or(()),
        Some("Polygon") => {
            let rings = coords
                .as_array()
                .ok_or(())?
                .iter()
                .map(parse_ring)
                .collect::<Option<Vec<_>>>()
                .ok_or(())?;
            if rings.is_empty() {
                return Err(());
            }
            Ok(GeometryShape::Polygon(rings))
        }
        Some("MultiPolygon") => {
            // The largest member carries the farm; the others are discarded.
            let polys = coords
                .as_array()
                .ok_or(())?
                .iter()
                .map(|p| p.as_array()?.iter().map(parse_ring).collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()
                .ok_or(())?;
            polys
                .into_iter()
                .filter(|p| !p.is_empty())
                .max_by(|a, b| ring_area(&a[0]).total_cmp(&ring_area(&b[0])))
                .map(GeometryShape::Polygon)
                .ok_or(())
        }
        _ => Err(()),
    }
}

fn load_farms_geojson(
    path: &Path,
    text: &str,
    cols: &FarmColumns,
) -> Result<(Vec<SolarFarmRecord>, IngestReport)> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::format(path, "expected a GeoJSON FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::format(path, "FeatureCollection without `features`"))?;

    let mut report = IngestReport::default();
    let mut farms = Vec::new();
    for feature in features {
        let props = feature.get("properties").cloned().unwrap_or(Value::Null);
        let text = |k: &str| match props.get(k) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            _ => None,
        };
        let num = |k: &str| match props.get(k) {
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => s.trim().parse::<f64>().ok(),
            _ => None,
        }
        .filter(|v| v.is_finite());
        let fields = FarmFields {
            farm_id: text(&cols.farm_id).filter(|s| !s.is_empty()),
            name: text(&cols.name).unwrap_or_default(),
            lat: num(&cols.lat),
            lon: num(&cols.lon),
            capacity: num(&cols.capacity_mw_dc),
            area: num(&cols.area_m2),
            state: text(&cols.state).unwrap_or_default(),
            county: text(&cols.county).unwrap_or_default(),
        };
        let geometry = feature.get("geometry").filter(|g| !g.is_null()).map(parse_geometry);
        farms.extend(accept_farm(fields, geometry, &mut report));
    }
    Ok((farms, report))
}

/// A ring is valid when it has at least four positions, repeats its first
/// position at the end, and no two non-adjacent edges intersect.
pub fn is_valid_ring(ring: &[GroundPoint]) -> bool {
    if ring.len() < 4 || ring.first() != ring.last() {
        return false;
    }
    let n = ring.len() - 1;
    let seg = |i: usize| (ring[i], ring[i + 1]);
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn orient(a: GroundPoint, b: GroundPoint, c: GroundPoint) -> f64 {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn on_segment(a: GroundPoint, b: GroundPoint, p: GroundPoint) -> bool {
    p.lon >= a.lon.min(b.lon) && p.lon <= a.lon.max(b.lon) && p.lat >= a.lat.min(b.lat) && p.lat <= a.lat.max(b.lat)
}

fn segments_intersect(a: GroundPoint, b: GroundPoint, c: GroundPoint, d: GroundPoint) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Signed planar area in squared degrees (positive for counter-clockwise).
pub fn ring_area(ring: &[GroundPoint]) -> f64 {
    ring.windows(2)
        .map(|w| w[0].lon * w[1].lat - w[1].lon * w[0].lat)
        .sum::<f64>()
        / 2.0
}

fn ring_centroid(ring: &[GroundPoint]) -> GroundPoint {
    // Work relative to the first vertex to keep the shoelace sums well conditioned.
    let o = ring[0];
    let local: Vec<GroundPoint> = ring
        .iter()
        .map(|p| GroundPoint {
            lat: p.lat - o.lat,
            lon: p.lon - o.lon,
        })
        .collect();
    let a = ring_area(&local);
    if a.abs() < 1e-15 {
        let n = (ring.len() - 1) as f64;
        let (lat, lon) = ring[..ring.len() - 1]
            .iter()
            .fold((0.0, 0.0), |(la, lo), p| (la + p.lat, lo + p.lon));
        return GroundPoint { lat: lat / n, lon: lon / n };
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for w in local.windows(2) {
        let cross = w[0].lon * w[1].lat - w[1].lon * w[0].lat;
        cx += (w[0].lon + w[1].lon) * cross;
        cy += (w[0].lat + w[1].lat) * cross;
    }
    GroundPoint {
        lat: o.lat + cy / (6.0 * a),
        lon: o.lon + cx / (6.0 * a),
    }
}
