//! Noon-report ingestion.
//!
//! Raw tables (one row per daily report, cells kept verbatim) are turned into
//! [`VoyageRecord`]s with decimal-degree positions, UTC timestamps and
//! unit-normalized numeric fields. Optional cells carry a tri-state [`Cell`]
//! so that "not reported" and "reported but unreadable" stay distinguishable
//! all the way to the missing-value census in the pipeline.

mod compass;
mod position;
mod table;
mod timestamp;

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compass::{Compass, UnknownCompass};
pub use position::{format_ddm, normalize_lon, parse_ddm_position, GeoPosition};
pub use table::{
    parse_report_table, read_report_csv, write_report_csv, ParsedReports, RawReportRow,
    ReportField, ReportSchema,
};
pub use timestamp::{format_report_timestamp, parse_report_timestamp, TzPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("malformed position {0:?}")]
    MalformedPosition(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("malformed date {0:?}")]
    MalformedDate(String),
    #[error("timezone policy cannot resolve: {0}")]
    AmbiguousTimezone(String),
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("no report rows")]
    EmptyInput,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Row(#[from] RowParseError),
}

/// A row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("row {row}, column {column:?}, cell {cell:?}: {reason}")]
pub struct RowParseError {
    pub row: usize,
    pub column: String,
    pub cell: String,
    pub reason: String,
}

/// Value of an optional report cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell<T> {
    Present(T),
    /// Blank or an explicit "not available" token.
    Missing,
    /// Text was present but did not parse or violated a range constraint.
    Rejected(String),
}

impl<T> Cell<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Cell::Present(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_present(&self) -> bool {
        matches!(self, Cell::Present(_))
    }
}

impl<T: Clone> Cell<T> {
    pub fn get(&self) -> Option<T> {
        self.value().cloned()
    }
}

impl<T> Default for Cell<T> {
    fn default() -> Self {
        Cell::Missing
    }
}

/// Operational states that make a report unusable for modeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateFlag {
    Loading,
    Anchor,
    Bunkering,
    Discharging,
    Anchored,
    Drifting,
}

impl StateFlag {
    pub const ALL: [StateFlag; 6] = [
        StateFlag::Loading,
        StateFlag::Anchor,
        StateFlag::Bunkering,
        StateFlag::Discharging,
        StateFlag::Anchored,
        StateFlag::Drifting,
    ];

    /// Label as written in the report template.
    pub fn label(self) -> &'static str {
        match self {
            StateFlag::Loading => "Loading Operation",
            StateFlag::Anchor => "Anchor",
            StateFlag::Bunkering => "Bunkering Operation",
            StateFlag::Discharging => "Discharging Operation",
            StateFlag::Anchored => "VSL Anchored",
            StateFlag::Drifting => "Drifting",
        }
    }

    pub fn parse(token: &str) -> Option<StateFlag> {
        let t = token.trim().to_ascii_lowercase();
        let t = t.strip_suffix(" operation").unwrap_or(&t);
        match t {
            "loading" => Some(StateFlag::Loading),
            "anchor" => Some(StateFlag::Anchor),
            "bunkering" => Some(StateFlag::Bunkering),
            "discharging" => Some(StateFlag::Discharging),
            "vsl anchored" | "anchored" => Some(StateFlag::Anchored),
            "drifting" => Some(StateFlag::Drifting),
            _ => None,
        }
    }
}

impl fmt::Display for StateFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One parsed noon report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoyageRecord {
    /// Index of the source row in the raw table.
    pub row: usize,
    pub timestamp_utc: DateTime<Utc>,
    pub position: GeoPosition,
    /// knots
    pub sog_avg_24h: Cell<f64>,
    /// rpm
    pub engine_rpm_avg_24h: Cell<f64>,
    /// fraction (reports log percent)
    pub propeller_slip: Cell<f64>,
    pub wind_dir: Cell<Compass>,
    /// Beaufort 0..=12
    pub wind_force: Cell<u8>,
    pub swell_dir: Cell<Compass>,
    pub swell_force: Cell<u8>,
    pub current_dir: Cell<Compass>,
    /// knots
    pub current_speed: Cell<f64>,
    /// metric tons per 24 h
    pub fuel_ulsfo_me: Cell<f64>,
    pub fuel_ulsfo_boiler: Cell<f64>,
    pub fuel_mgo_me: Cell<f64>,
    pub fuel_mgo_boiler: Cell<f64>,
    pub fuel_mgo_aux: Cell<f64>,
    /// meters
    pub draft_fwd: Cell<f64>,
    pub draft_aft: Cell<f64>,
    pub next_port: Cell<String>,
    pub state_flags: BTreeSet<StateFlag>,
}

impl VoyageRecord {
    /// A record at `position`/`timestamp_utc` with every optional field missing.
    pub fn empty(row: usize, timestamp_utc: DateTime<Utc>, position: GeoPosition) -> Self {
        Self {
            row,
            timestamp_utc,
            position,
            sog_avg_24h: Cell::Missing,
            engine_rpm_avg_24h: Cell::Missing,
            propeller_slip: Cell::Missing,
            wind_dir: Cell::Missing,
            wind_force: Cell::Missing,
            swell_dir: Cell::Missing,
            swell_force: Cell::Missing,
            current_dir: Cell::Missing,
            current_speed: Cell::Missing,
            fuel_ulsfo_me: Cell::Missing,
            fuel_ulsfo_boiler: Cell::Missing,
            fuel_mgo_me: Cell::Missing,
            fuel_mgo_boiler: Cell::Missing,
            fuel_mgo_aux: Cell::Missing,
            draft_fwd: Cell::Missing,
            draft_aft: Cell::Missing,
            next_port: Cell::Missing,
            state_flags: BTreeSet::new(),
        }
    }
}
