mod common;

use std::fs;

use common::fixture;
use skybeam::ingest::{load_airports, load_farms, load_flights, AirportColumns, FarmColumns, FlightColumns};

#[test]
fn every_rejection_is_counted() {
    let (airports, _) = load_airports(&fixture("airports.csv"), &AirportColumns::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flights.csv");
    fs::write(
        &path,
        "flight_id,origin,dest,date,wheels_off_local,elapsed_min\n\
         OK1,DFW,AUS,2026-01-14,07:40,50\n\
         OK2,AUS,DFW,2026-01-14,0940,50\n\
         BAD,DFW,AUS,2026-13-01,07:40,50\n\
         NEG,DFW,AUS,2026-01-14,07:40,-5\n\
         LOOP,DFW,DFW,2026-01-14,07:40,50\n\
         FAR,DFW,XXX,2026-01-14,07:40,50\n\
         SHORT,DFW\n",
    )
    .unwrap();
    let (flights, r) = load_flights(&path, &airports, &FlightColumns::default()).unwrap();
    assert_eq!(flights.len(), 2);
    assert_eq!((r.total_rows, r.accepted, r.unparseable), (7, 2, 2));
    assert_eq!((r.bad_elapsed, r.same_endpoints, r.unknown_airport), (1, 1, 1));
    assert_eq!(r.rejected(), 5);
    // 07:40 CST is 13:40 UTC
    assert_eq!(flights[0].wheels_off_utc % 86_400, 13 * 3600 + 40 * 60);
}

#[test]
fn demo_fixture_loads_cleanly() {
    let (farms, r) = load_farms(&fixture("demo/farms.csv"), &FarmColumns::default()).unwrap();
    assert_eq!(farms.len(), 50);
    assert_eq!(r.rejected(), 0);
    assert_eq!(farms.iter().filter(|f| f.state.is_empty()).count(), 2);
    let (airports, _) = load_airports(&fixture("airports.csv"), &AirportColumns::default()).unwrap();
    let (flights, r) = load_flights(&fixture("demo/flights.csv"), &airports, &FlightColumns::default()).unwrap();
    assert_eq!((flights.len(), r.rejected()), (20, 0));
}

#[test]
fn renamed_columns_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("farms.csv");
    fs::write(&path, "id,label,y,x,mw,m2,st,cty\nF1,One,31.0,-97.0,40,2500000,TX,Bell\n").unwrap();
    let cols = FarmColumns {
        farm_id: "id".into(),
        name: "label".into(),
        lat: "y".into(),
        lon: "x".into(),
        capacity_mw_dc: "mw".into(),
        area_m2: "m2".into(),
        state: "st".into(),
        county: "cty".into(),
    };
    let (farms, _) = load_farms(&path, &cols).unwrap();
    assert_eq!(farms[0].location.lat, 31.0);
    assert!(load_farms(&path, &FarmColumns::default()).is_err());
}
