//! Ground-to-air microwave power beaming from solar farms to aircraft.
//!
//! The crate goes from raw flight, airport and solar-farm tables to
//! optimized beaming plans:
//!
//! * [`ingest`] loads and validates the three input tables;
//! * [`geo`] discretizes great-circle flights and measures slant ranges;
//! * [`physics`] holds the link budget and decides which farms qualify;
//! * [`coverage`] precomputes which farm can reach which aircraft when;
//! * [`economics`] turns received energy into fuel and CO2 savings;
//! * [`optimize`] builds and solves the shift-choice and equipment-choice
//!   MILPs;
//! * [`report`] aggregates plans into CSV and GeoJSON tables;
//! * [`config`] and [`pipeline`] drive whole runs from a JSON config.

pub mod config;
pub mod coverage;
pub mod economics;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod optimize;
pub mod physics;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
