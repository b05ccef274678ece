use chrono::Datelike;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Column, ColumnKind, FusedDataset, RowKey, Value};
use crate::grid::{fill_series_at, EnvGrid};
use crate::report::{Cell, Compass, VoyageRecord};

/// Name of the response column.
pub const RESPONSE: &str = "total_fuel";

/// Removes every record that carries any state flag.
pub fn drop_state_shift_rows(records: Vec<VoyageRecord>) -> Vec<VoyageRecord> {
    records.into_iter().filter(|r| r.state_flags.is_empty()).collect()
}

/// How voyage segments are delimited.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SegmentRule {
    /// New segment whenever the reported next port changes.
    #[default]
    NextPortChange,
    /// New segment at each listed source row index.
    Breakpoints { rows: Vec<usize> },
}

/// Meteorological season; months are flipped for southern latitudes.
pub fn season_of(month: u32, lat: f64) -> &'static str {
    const NORTH: [&str; 4] = ["winter", "spring", "summer", "autumn"];
    let q = ((month % 12) / 3) as usize;
    if lat < 0.0 {
        NORTH[(q + 2) % 4]
    } else {
        NORTH[q]
    }
}

fn num(c: &Cell<f64>) -> Value {
    Value::from_opt(c.get())
}

fn beaufort(c: &Cell<u8>) -> Value {
    Value::from_opt(c.get().map(f64::from))
}

fn compass(c: &Cell<Compass>) -> Value {
    c.get().map_or(Value::Missing, |d| Value::Cat(d.to_string()))
}

fn sum(cells: &[&Cell<f64>]) -> Option<f64> {
    cells.iter().map(|c| c.get()).sum()
}

/// Tabulates records and appends the derived columns: trim (aft minus fwd),
/// main-engine and total fuel, calendar fields, season, hemisphere and
/// voyage segment. Missing inputs give missing outputs.
pub fn derive_features(records: &[VoyageRecord], segments: &SegmentRule) -> FusedDataset {
    use ColumnKind::*;
    let columns = vec![
        Column::new("lat", "deg", Numeric),
        Column::new("lon", "deg", Numeric),
        Column::new("sog_avg_24h", "kn", Numeric),
        Column::new("engine_rpm_avg_24h", "rpm", Numeric),
        Column::new("propeller_slip", "fraction", Numeric),
        Column::new("wind_dir", "compass", Categorical),
        Column::new("wind_force", "Bft", Numeric),
        Column::new("swell_dir", "compass", Categorical),
        Column::new("swell_force", "Bft", Numeric),
        Column::new("current_dir", "compass", Categorical),
        Column::new("current_speed", "kn", Numeric),
        Column::new("fuel_ulsfo_me", "t/day", Numeric),
        Column::new("fuel_ulsfo_boiler", "t/day", Numeric),
        Column::new("fuel_mgo_me", "t/day", Numeric),
        Column::new("fuel_mgo_boiler", "t/day", Numeric),
        Column::new("fuel_mgo_aux", "t/day", Numeric),
        Column::new("draft_fwd", "m", Numeric),
        Column::new("draft_aft", "m", Numeric),
        Column::new("next_port", "text", Categorical),
        Column::new("trim", "m aft-fwd (+ by stern)", Numeric),
        Column::new("fuel_me", "t/day", Numeric),
        Column::new("year", "year", Numeric),
        Column::new("month", "month", Numeric),
        Column::new("day", "day", Numeric),
        Column::new("season", "season", Categorical),
        Column::new("hemisphere_north", "flag", Numeric),
        Column::new("voyage_segment", "index", Categorical),
        Column::new(RESPONSE, "t/day", Response),
    ];

    let mut segment = 0usize;
    let mut last_port: Option<String> = None;
    let mut rows = Vec::with_capacity(records.len());
    let mut keys = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        match segments {
            SegmentRule::NextPortChange => {
                if let Some(p) = r.next_port.get() {
                    if last_port.as_ref().is_some_and(|lp| *lp != p) {
                        segment += 1;
                    }
                    last_port = Some(p);
                }
            }
            SegmentRule::Breakpoints { rows } => {
                if i > 0 && rows.contains(&r.row) {
                    segment += 1;
                }
            }
        }
        let trim = r.draft_aft.get().zip(r.draft_fwd.get()).map(|(a, f)| a - f);
        let fuel_me = sum(&[&r.fuel_ulsfo_me, &r.fuel_mgo_me]);
        let total = fuel_me
            .zip(sum(&[&r.fuel_ulsfo_boiler, &r.fuel_mgo_boiler, &r.fuel_mgo_aux]))
            .map(|(a, b)| a + b);
        let date = r.timestamp_utc.date_naive();
        let lat = r.position.lat;
        rows.push(vec![
            Value::Num(lat),
            Value::Num(r.position.lon),
            num(&r.sog_avg_24h),
            num(&r.engine_rpm_avg_24h),
            num(&r.propeller_slip),
            compass(&r.wind_dir),
            beaufort(&r.wind_force),
            compass(&r.swell_dir),
            beaufort(&r.swell_force),
            compass(&r.current_dir),
            num(&r.current_speed),
            num(&r.fuel_ulsfo_me),
            num(&r.fuel_ulsfo_boiler),
            num(&r.fuel_mgo_me),
            num(&r.fuel_mgo_boiler),
            num(&r.fuel_mgo_aux),
            num(&r.draft_fwd),
            num(&r.draft_aft),
            r.next_port.get().map_or(Value::Missing, Value::Cat),
            Value::from_opt(trim),
            Value::from_opt(fuel_me),
            Value::Num(f64::from(date.year())),
            Value::Num(f64::from(date.month())),
            Value::Num(f64::from(date.day())),
            Value::Cat(season_of(date.month(), lat).to_string()),
            Value::Num(if lat >= 0.0 { 1.0 } else { 0.0 }),
            Value::Cat(segment.to_string()),
            Value::from_opt(total),
        ]);
        keys.push(RowKey { row: r.row, timestamp_utc: r.timestamp_utc, position: r.position });
    }
    FusedDataset { columns, rows, keys }
}

/// A grid with the name used for its column prefix on code collisions.
#[derive(Debug, Clone)]
pub struct NamedGrid {
    pub name: String,
    pub grid: EnvGrid,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FusionCoverage {
    /// Rows outside each grid (columns stay missing for them).
    pub out_of_bounds: IndexMap<String, usize>,
    /// Per column: cells that matched a missing grid value and were repaired
    /// along the time axis.
    pub repaired: IndexMap<String, usize>,
    /// Per column: cells left missing.
    pub missing: IndexMap<String, usize>,
    pub max_distance_deg: f64,
}

/// Appends one column per grid parameter with the nearest-cell value at each
/// row's time and place. Cells landing on missing grid values (e.g. land)
/// are repaired by time-weighted linear interpolation over the in-bounds
/// rows; rows outside a grid stay missing for all of its columns.
pub fn fuse_environment(mut ds: FusedDataset, grids: &[NamedGrid]) -> (FusedDataset, FusionCoverage) {
    let mut cov = FusionCoverage::default();
    let n = ds.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (ds.keys[i].timestamp_utc, i));
    for ng in grids {
        let samples: Vec<_> = ds
            .keys
            .iter()
            .map(|k| ng.grid.sample_at(&k.position, k.timestamp_utc).ok())
            .collect();
        let oob = samples.iter().filter(|s| s.is_none()).count();
        if oob > 0 {
            log::warn!("grid {}: {oob} of {n} rows out of bounds", ng.name);
        }
        cov.out_of_bounds.insert(ng.name.clone(), oob);
        for s in samples.iter().flatten() {
            cov.max_distance_deg = cov.max_distance_deg.max(s.distance_deg);
        }
        for code in ng.grid.param_codes() {
            let name = if ds.column_index(code).is_some() { format!("{}_{code}", ng.name) } else { code.to_string() };
            let unit = ng.grid.meta().get(code).map_or(String::new(), |m| m.unit.clone());
            let raw: Vec<Option<Option<f64>>> =
                samples.iter().map(|s| s.as_ref().map(|s| s.values[code])).collect();
            let mut col: Vec<Value> = raw.iter().map(|v| Value::from_opt(v.flatten())).collect();

            let inb: Vec<usize> = order.iter().copied().filter(|&i| raw[i].is_some()).collect();
            let gaps = inb.iter().filter(|&&i| raw[i] == Some(None)).count();
            let mut repaired = 0;
            if gaps > 0 {
                let pos: Vec<f64> = inb.iter().map(|&i| ds.keys[i].timestamp_utc.timestamp() as f64).collect();
                let vals: Vec<Option<f64>> = inb.iter().map(|&i| raw[i].flatten()).collect();
                match fill_series_at(&pos, &vals) {
                    Ok(filled) => {
                        for (&i, v) in inb.iter().zip(filled) {
                            col[i] = Value::Num(v);
                        }
                        repaired = gaps;
                    }
                    Err(_) => log::warn!("column {name}: no observed values to repair from"),
                }
            }
            cov.repaired.insert(name.clone(), repaired);
            cov.missing.insert(name.clone(), col.iter().filter(|v| v.is_missing()).count());
            ds.push_column(Column::new(&name, &unit, ColumnKind::Numeric), col);
        }
    }
    // keep the response last
    if let Some(r) = ds.response_index() {
        let last = ds.columns.len() - 1;
        if r != last {
            let col = ds.columns.remove(r);
            ds.columns.push(col);
            for row in &mut ds.rows {
                let v = row.remove(r);
                row.push(v);
            }
        }
    }
    (ds, cov)
}
