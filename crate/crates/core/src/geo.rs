//! Spherical-Earth geometry: great-circle distance and interpolation,
//! constant-altitude trajectory discretization, and slant range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AirportTable, FlightRecord};

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GroundPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidInput(format!(
                "coordinate out of range: lat {lat}, lon {lon}"
            )));
        }
        Ok(GroundPoint { lat, lon })
    }

    fn to_unit(self) -> [f64; 3] {
        let (lat, lon) = (self.lat.to_radians(), self.lon.to_radians());
        [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
    }

    fn from_unit(v: [f64; 3]) -> Self {
        let lat = v[2].atan2((v[0] * v[0] + v[1] * v[1]).sqrt());
        let lon = v[1].atan2(v[0]);
        GroundPoint {
            lat: lat.to_degrees(),
            lon: lon.to_degrees(),
        }
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Haversine distance in km.
pub fn great_circle_distance(a: GroundPoint, b: GroundPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Minor great-circle arc between two points, prepared for repeated
/// interpolation.
#[derive(Debug, Clone, Copy)]
pub struct GreatCircleArc {
    start: [f64; 3],
    end: [f64; 3],
    angle: f64,
}

impl GreatCircleArc {
    pub fn new(a: GroundPoint, b: GroundPoint) -> Result<Self> {
        let (start, end) = (a.to_unit(), b.to_unit());
        let angle = norm(cross(start, end)).atan2(dot(start, end));
        if angle > 0.0 && (std::f64::consts::PI - angle) < 1e-9 {
            return Err(Error::Antipodal);
        }
        Ok(GreatCircleArc { start, end, angle })
    }

    /// Arc length in km.
    pub fn length_km(&self) -> f64 {
        self.angle * EARTH_RADIUS_KM
    }

    pub fn point_at(&self, fraction: f64) -> GroundPoint {
        let f = fraction.clamp(0.0, 1.0);
        if self.angle < 1e-15 {
            return GroundPoint::from_unit(self.start);
        }
        let s = self.angle.sin();
        let wa = ((1.0 - f) * self.angle).sin() / s;
        let wb = (f * self.angle).sin() / s;
        GroundPoint::from_unit([
            wa * self.start[0] + wb * self.end[0],
            wa * self.start[1] + wb * self.end[1],
            wa * self.start[2] + wb * self.end[2],
        ])
    }

    /// Ground distance in km from `p` to the full great circle carrying this arc.
    /// A lower bound on the distance to any point of the arc.
    pub fn cross_track_km(&self, p: GroundPoint) -> f64 {
        let n = cross(self.start, self.end);
        let len = norm(n);
        if len < 1e-15 {
            return great_circle_distance(p, GroundPoint::from_unit(self.start));
        }
        let s = (dot(p.to_unit(), n) / len).abs().min(1.0);
        s.asin() * EARTH_RADIUS_KM
    }
}

pub fn interpolate_great_circle(a: GroundPoint, b: GroundPoint, fraction: f64) -> Result<GroundPoint> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidInput(format!("fraction {fraction} outside [0, 1]")));
    }
    if fraction == 0.0 {
        return Ok(a);
    }
    if fraction == 1.0 {
        return Ok(b);
    }
    Ok(GreatCircleArc::new(a, b)?.point_at(fraction))
}

/// Straight-line farm-to-aircraft distance in metres.
pub fn slant_range(farm: GroundPoint, air: GroundPoint, altitude_m: f64) -> f64 {
    let ground_m = great_circle_distance(farm, air) * 1000.0;
    ground_m.hypot(altitude_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t_utc: i64,
    pub ground: GroundPoint,
}

/// A flight's time-discretized great-circle path at constant altitude.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub flight_id: String,
    pub origin: GroundPoint,
    pub destination: GroundPoint,
    pub wheels_off_utc: i64,
    pub wheels_on_utc: i64,
    pub samples: Vec<TrajectorySample>,
    pub altitude_m: f64,
    /// Effective ground speed (path length over elapsed time), m/s.
    pub speed_mps: f64,
    pub dt_s: i64,
    pub ground_distance_km: f64,
    arc: GreatCircleArc,
}

impl Trajectory {
    pub fn elapsed_s(&self) -> i64 {
        self.wheels_on_utc - self.wheels_off_utc
    }

    pub fn is_airborne(&self, t_utc: i64) -> bool {
        t_utc >= self.wheels_off_utc && t_utc <= self.wheels_on_utc
    }

    /// Ground position at an arbitrary instant, clamped to the endpoints.
    pub fn position_at(&self, t_utc: i64) -> GroundPoint {
        if t_utc <= self.wheels_off_utc {
            return self.origin;
        }
        if t_utc >= self.wheels_on_utc {
            return self.destination;
        }
        let f = (t_utc - self.wheels_off_utc) as f64 / self.elapsed_s() as f64;
        self.arc.point_at(f)
    }

    pub fn arc(&self) -> &GreatCircleArc {
        &self.arc
    }
}

/// Sample a flight's great-circle path every `dt_s` seconds from wheels-off,
/// with a final sample at wheels-on.
///
/// The aircraft covers the whole path in exactly the recorded elapsed time;
/// cruise speed only enters the propulsion power, not the geometry.
pub fn discretize_flight(
    rec: &FlightRecord,
    airports: &AirportTable,
    altitude_m: f64,
    dt_s: i64,
) -> Result<Trajectory> {
    if dt_s <= 0 {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt_s}")));
    }
    if rec.elapsed_s <= 0 {
        return Err(Error::InvalidInput(format!(
            "flight {}: non-positive elapsed time",
            rec.flight_id
        )));
    }
    let lookup = |code: &str| {
        airports
            .get(code)
            .map(|a| a.location())
            .ok_or_else(|| Error::InvalidInput(format!("flight {}: unknown airport {code}", rec.flight_id)))
    };
    let origin = lookup(&rec.origin)?;
    let destination = lookup(&rec.destination)?;
    let arc = GreatCircleArc::new(origin, destination)?;
    let elapsed = rec.elapsed_s;
    let n = (elapsed + dt_s - 1) / dt_s;
    let samples = (0..=n)
        .map(|k| {
            let offset = (k * dt_s).min(elapsed);
            let ground = match offset {
                0 => origin,
                o if o == elapsed => destination,
                o => arc.point_at(o as f64 / elapsed as f64),
            };
            TrajectorySample {
                t_utc: rec.wheels_off_utc + offset,
                ground,
            }
        })
        .collect();
    let ground_distance_km = great_circle_distance(origin, destination);
    Ok(Trajectory {
        flight_id: rec.flight_id.clone(),
        origin,
        destination,
        wheels_off_utc: rec.wheels_off_utc,
        wheels_on_utc: rec.wheels_off_utc + elapsed,
        samples,
        altitude_m,
        speed_mps: ground_distance_km * 1000.0 / elapsed as f64,
        dt_s,
        ground_distance_km,
        arc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lat: f64, lon: f64) -> GroundPoint {
        GroundPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn identity_distance_is_zero() {
        assert_eq!(great_circle_distance(p(30.2, -97.7), p(30.2, -97.7)), 0.0);
    }

    #[test]
    fn antipodal_half_circumference() {
        let d = great_circle_distance(p(0.0, 0.0), p(0.0, 180.0));
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-6);
        assert!((d - 20015.1).abs() < 0.1);
    }

    #[test]
    fn equatorial_midpoint() {
        let m = interpolate_great_circle(p(0.0, 0.0), p(0.0, 90.0), 0.5).unwrap();
        assert!(m.lat.abs() < 1e-12);
        assert!((m.lon - 45.0).abs() < 1e-12);
    }

    #[test]
    fn endpoints_are_exact() {
        let (a, b) = (p(40.6398, -73.7789), p(33.9425, -118.408));
        assert_eq!(interpolate_great_circle(a, b, 0.0).unwrap(), a);
        assert_eq!(interpolate_great_circle(a, b, 1.0).unwrap(), b);
    }

    #[test]
    fn antipodal_interpolation_is_an_error() {
        let r = interpolate_great_circle(p(0.0, 0.0), p(0.0, 180.0), 0.5);
        assert!(matches!(r, Err(Error::Antipodal)));
    }

    #[test]
    fn out_of_range_points_rejected() {
        assert!(GroundPoint::new(95.0, 0.0).is_err());
        assert!(GroundPoint::new(0.0, -181.0).is_err());
    }

    #[test]
    fn slant_range_cases() {
        let farm = p(31.0, -100.0);
        assert_eq!(slant_range(farm, farm, 12_100.0), 12_100.0);
        let z = 5000f64.hypot(12_100.0);
        assert!((z - 13_092.36).abs() < 0.01);
        let near = interpolate_great_circle(farm, p(31.0, -99.0), 0.01).unwrap();
        let far = interpolate_great_circle(farm, p(31.0, -99.0), 0.02).unwrap();
        assert!(slant_range(farm, near, 12_100.0) < slant_range(farm, far, 12_100.0));
    }

    #[test]
    fn cross_track_of_on_route_point_is_zero() {
        let arc = GreatCircleArc::new(p(30.19, -97.67), p(32.90, -97.04)).unwrap();
        let mid = arc.point_at(0.5);
        assert!(arc.cross_track_km(mid) < 1e-6);
        let off = p(30.19, -92.0);
        assert!(arc.cross_track_km(off) > 400.0);
    }
}
