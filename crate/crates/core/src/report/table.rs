use std::collections::BTreeSet;
use std::io::{Read, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{
    format_ddm, format_report_timestamp, parse_ddm_position, parse_report_timestamp, Cell,
    Compass, ReportError, RowParseError, StateFlag, TzPolicy, VoyageRecord,
};

/// A raw table row: column name to cell text, exactly as exported.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawReportRow {
    pub cells: IndexMap<String, String>,
}

impl RawReportRow {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            cells: pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

/// Record fields a report column can map onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportField {
    Timestamp,
    Position,
    SogAvg24h,
    EngineRpmAvg24h,
    PropellerSlip,
    WindDir,
    WindForce,
    SwellDir,
    SwellForce,
    CurrentDir,
    CurrentSpeed,
    FuelUlsfoMe,
    FuelUlsfoBoiler,
    FuelMgoMe,
    FuelMgoBoiler,
    FuelMgoAux,
    /// Combined `FWD/AFT` draft cell.
    Draft,
    NextPort,
    StateFlags,
}

impl ReportField {
    pub const REQUIRED: [ReportField; 9] = [
        ReportField::Timestamp,
        ReportField::Position,
        ReportField::SogAvg24h,
        ReportField::EngineRpmAvg24h,
        ReportField::FuelUlsfoMe,
        ReportField::FuelUlsfoBoiler,
        ReportField::FuelMgoMe,
        ReportField::FuelMgoBoiler,
        ReportField::FuelMgoAux,
    ];
}

/// Column name to record field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportSchema {
    pub columns: IndexMap<String, ReportField>,
}

impl Default for ReportSchema {
    /// Column names of the standard noon-report template.
    fn default() -> Self {
        use ReportField::*;
        let cols = [
            ("Date/time", Timestamp),
            ("Geograph. position", Position),
            ("Average speed 24hrs", SogAvg24h),
            ("Average RPM last 24hrs", EngineRpmAvg24h),
            ("Propeller Slip", PropellerSlip),
            ("Wind Direction", WindDir),
            ("Wind Force", WindForce),
            ("Swell Direction", SwellDir),
            ("Swell Force", SwellForce),
            ("Current Direction", CurrentDir),
            ("Current Speed", CurrentSpeed),
            ("ULSFO bunkers consumption last 24hrs - Main Engine", FuelUlsfoMe),
            ("ULSFO bunkers consumption last 24hrs - Boiler", FuelUlsfoBoiler),
            ("MGO bunkers consumption last 24hrs - Main Engine", FuelMgoMe),
            ("MGO bunkers consumption last 24hrs - Boiler", FuelMgoBoiler),
            ("MGO bunkers consumption last 24hrs - Auxiliary", FuelMgoAux),
            ("Draft Current FWD/AFT", Draft),
            ("Next port Name", NextPort),
            ("Vessel State", StateFlags),
        ];
        Self {
            columns: cols.into_iter().map(|(c, f)| (c.to_string(), f)).collect(),
        }
    }
}

impl ReportSchema {
    pub fn column_for(&self, field: ReportField) -> Option<&str> {
        self.columns
            .iter()
            .find(|(_, f)| **f == field)
            .map(|(c, _)| c.as_str())
    }
}

/// Output of [`parse_report_table`]: accepted records plus the rejected rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedReports {
    pub records: Vec<VoyageRecord>,
    pub rejected: Vec<RowParseError>,
}

/// Reads a delimiter-separated export. Quoted cells may contain line breaks.
pub fn read_report_csv<R: Read>(reader: R, delimiter: u8) -> Result<Vec<RawReportRow>, ReportError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| ReportError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ReportError::Csv(e.to_string()))?;
        let cells = headers
            .iter()
            .cloned()
            .zip(rec.iter().map(str::to_string))
            .collect();
        rows.push(RawReportRow { cells });
    }
    Ok(rows)
}

/// Parses raw rows into records. Rows with unusable required cells or
/// unknown categorical tokens end up in [`ParsedReports::rejected`].
pub fn parse_report_table(
    rows: &[RawReportRow],
    schema: &ReportSchema,
    tz: &TzPolicy,
) -> Result<ParsedReports, ReportError> {
    let first = rows.first().ok_or(ReportError::EmptyInput)?;
    for field in ReportField::REQUIRED {
        let col = schema
            .column_for(field)
            .ok_or_else(|| ReportError::MissingColumn(format!("no column mapped to {field:?}")))?;
        if !first.cells.contains_key(col) {
            return Err(ReportError::MissingColumn(col.to_string()));
        }
    }
    for col in schema.columns.keys() {
        if !first.cells.contains_key(col) {
            return Err(ReportError::MissingColumn(col.clone()));
        }
    }

    let mut out = ParsedReports::default();
    for (i, row) in rows.iter().enumerate() {
        match parse_row(i, row, schema, tz) {
            Ok(r) => out.records.push(r),
            Err(e) => {
                log::debug!("rejecting report row: {e}");
                out.rejected.push(e);
            }
        }
    }
    Ok(out)
}

fn is_missing_token(s: &str) -> bool {
    matches!(
        s.trim().to_ascii_uppercase().as_str(),
        "" | "-" | "--" | "N/A" | "NA" | "NIL" | "NULL" | "NAN"
    )
}

fn numeric(text: &str, ok: impl Fn(f64) -> bool) -> Cell<f64> {
    if is_missing_token(text) {
        return Cell::Missing;
    }
    match text.trim().trim_end_matches('%').trim().parse::<f64>() {
        Ok(v) if v.is_finite() && ok(v) => Cell::Present(v),
        _ => Cell::Rejected(text.to_string()),
    }
}

fn beaufort(text: &str) -> Cell<u8> {
    if is_missing_token(text) {
        return Cell::Missing;
    }
    match text.trim().parse::<u8>() {
        Ok(v) if v <= 12 => Cell::Present(v),
        _ => Cell::Rejected(text.to_string()),
    }
}

fn parse_row(
    i: usize,
    row: &RawReportRow,
    schema: &ReportSchema,
    tz: &TzPolicy,
) -> Result<VoyageRecord, RowParseError> {
    let err = |col: &str, cell: &str, reason: String| RowParseError {
        row: i,
        column: col.to_string(),
        cell: cell.to_string(),
        reason,
    };
    let cell = |field: ReportField| -> Option<(&str, &str)> {
        let col = schema.column_for(field)?;
        row.cells.get(col).map(|v| (col, v.as_str()))
    };

    let (tc, tv) = cell(ReportField::Timestamp).ok_or_else(|| err("?", "", "no timestamp".into()))?;
    let timestamp = parse_report_timestamp(tv, tz).map_err(|e| err(tc, tv, e.to_string()))?;
    let (pc, pv) = cell(ReportField::Position).ok_or_else(|| err("?", "", "no position".into()))?;
    let position = parse_ddm_position(pv).map_err(|e| err(pc, pv, e.to_string()))?;

    let mut rec = VoyageRecord::empty(i, timestamp, position);
    let nonneg = |v: f64| v >= 0.0;
    let any = |_: f64| true;

    for (col, field) in &schema.columns {
        let Some(text) = row.cells.get(col) else {
            continue;
        };
        let text = text.as_str();
        let compass = || -> Result<Cell<Compass>, RowParseError> {
            if is_missing_token(text) {
                return Ok(Cell::Missing);
            }
            text.parse::<Compass>()
                .map(Cell::Present)
                .map_err(|_| err(col, text, "unknown compass category".into()))
        };
        match field {
            ReportField::Timestamp | ReportField::Position => {}
            ReportField::SogAvg24h => rec.sog_avg_24h = numeric(text, nonneg),
            ReportField::EngineRpmAvg24h => rec.engine_rpm_avg_24h = numeric(text, nonneg),
            ReportField::PropellerSlip => {
                rec.propeller_slip = match numeric(text, any) {
                    Cell::Present(p) => Cell::Present(p / 100.0),
                    other => other,
                }
            }
            ReportField::WindDir => rec.wind_dir = compass()?,
            ReportField::WindForce => rec.wind_force = beaufort(text),
            ReportField::SwellDir => rec.swell_dir = compass()?,
            ReportField::SwellForce => rec.swell_force = beaufort(text),
            ReportField::CurrentDir => rec.current_dir = compass()?,
            ReportField::CurrentSpeed => rec.current_speed = numeric(text, nonneg),
            ReportField::FuelUlsfoMe => rec.fuel_ulsfo_me = numeric(text, nonneg),
            ReportField::FuelUlsfoBoiler => rec.fuel_ulsfo_boiler = numeric(text, nonneg),
            ReportField::FuelMgoMe => rec.fuel_mgo_me = numeric(text, nonneg),
            ReportField::FuelMgoBoiler => rec.fuel_mgo_boiler = numeric(text, nonneg),
            ReportField::FuelMgoAux => rec.fuel_mgo_aux = numeric(text, nonneg),
            ReportField::Draft => {
                let (fwd, aft) = parse_draft(text);
                rec.draft_fwd = fwd;
                rec.draft_aft = aft;
            }
            ReportField::NextPort => {
                rec.next_port = if is_missing_token(text) {
                    Cell::Missing
                } else {
                    Cell::Present(text.trim().to_string())
                }
            }
            ReportField::StateFlags => rec.state_flags = parse_flags(text).map_err(|t| {
                err(col, text, format!("unknown state token {t:?}"))
            })?,
        }
    }
    Ok(rec)
}

/// Splits `"7.20/7.80"` into forward and aft drafts.
fn parse_draft(text: &str) -> (Cell<f64>, Cell<f64>) {
    if is_missing_token(text) {
        return (Cell::Missing, Cell::Missing);
    }
    let positive = |v: f64| v > 0.0;
    match text.split_once('/') {
        Some((f, a)) => (numeric(f, positive), numeric(a, positive)),
        None => (
            Cell::Rejected(text.to_string()),
            Cell::Rejected(text.to_string()),
        ),
    }
}

fn parse_flags(text: &str) -> Result<BTreeSet<StateFlag>, String> {
    if is_missing_token(text) {
        return Ok(BTreeSet::new());
    }
    text.split([',', ';', '|', '\n'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| StateFlag::parse(t).ok_or_else(|| t.to_string()))
        .collect()
}

fn fmt_cell(c: &Cell<f64>, scale: f64) -> String {
    match c {
        Cell::Present(v) => format!("{}", v * scale),
        Cell::Missing => String::new(),
        Cell::Rejected(t) => t.clone(),
    }
}

fn fmt_any<T: ToString>(c: &Cell<T>) -> String {
    match c {
        Cell::Present(v) => v.to_string(),
        Cell::Missing => String::new(),
        Cell::Rejected(t) => t.clone(),
    }
}

/// Writes records in the layout [`read_report_csv`] + [`parse_report_table`]
/// accept under the same schema and timezone policy.
pub fn write_report_csv<W: Write>(
    records: &[VoyageRecord],
    schema: &ReportSchema,
    tz: &TzPolicy,
    writer: W,
) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| ReportError::Csv(e.to_string());
    w.write_record(schema.columns.keys()).map_err(csv_err)?;
    for r in records {
        let mut line = Vec::with_capacity(schema.columns.len());
        for field in schema.columns.values() {
            let s = match field {
                ReportField::Timestamp => format_report_timestamp(r.timestamp_utc, tz)?,
                ReportField::Position => format_ddm(&r.position),
                ReportField::SogAvg24h => fmt_cell(&r.sog_avg_24h, 1.0),
                ReportField::EngineRpmAvg24h => fmt_cell(&r.engine_rpm_avg_24h, 1.0),
                ReportField::PropellerSlip => fmt_cell(&r.propeller_slip, 100.0),
                ReportField::WindDir => fmt_any(&r.wind_dir),
                ReportField::WindForce => fmt_any(&r.wind_force),
                ReportField::SwellDir => fmt_any(&r.swell_dir),
                ReportField::SwellForce => fmt_any(&r.swell_force),
                ReportField::CurrentDir => fmt_any(&r.current_dir),
                ReportField::CurrentSpeed => fmt_cell(&r.current_speed, 1.0),
                ReportField::FuelUlsfoMe => fmt_cell(&r.fuel_ulsfo_me, 1.0),
                ReportField::FuelUlsfoBoiler => fmt_cell(&r.fuel_ulsfo_boiler, 1.0),
                ReportField::FuelMgoMe => fmt_cell(&r.fuel_mgo_me, 1.0),
                ReportField::FuelMgoBoiler => fmt_cell(&r.fuel_mgo_boiler, 1.0),
                ReportField::FuelMgoAux => fmt_cell(&r.fuel_mgo_aux, 1.0),
                ReportField::Draft => match (&r.draft_fwd, &r.draft_aft) {
                    (Cell::Missing, Cell::Missing) => String::new(),
                    (f, a) => format!("{}/{}", fmt_cell(f, 1.0), fmt_cell(a, 1.0)),
                },
                ReportField::NextPort => fmt_any(&r.next_port),
                ReportField::StateFlags => r
                    .state_flags
                    .iter()
                    .map(|f| f.label())
                    .collect::<Vec<_>>()
                    .join("; "),
            };
            line.push(s);
        }
        w.write_record(&line).map_err(csv_err)?;
    }
    w.flush().map_err(|e| ReportError::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(overrides: &[(&str, &str)]) -> RawReportRow {
        let mut r = RawReportRow::from_pairs([
            ("Date/time", "16 NOV 2021 1200LT"),
            ("Geograph. position", "02-16.0N\n101-52.5E"),
            ("Average speed 24hrs", "13.6"),
            ("Average RPM last 24hrs", "88.5"),
            ("Propeller Slip", "4.5"),
            ("Wind Direction", "NE"),
            ("Wind Force", "4"),
            ("Swell Direction", "E"),
            ("Swell Force", "3"),
            ("Current Direction", "SW"),
            ("Current Speed", "0.6"),
            ("ULSFO bunkers consumption last 24hrs - Main Engine", "24.1"),
            ("ULSFO bunkers consumption last 24hrs - Boiler", "0.3"),
            ("MGO bunkers consumption last 24hrs - Main Engine", "0.0"),
            ("MGO bunkers consumption last 24hrs - Boiler", "0.0"),
            ("MGO bunkers consumption last 24hrs - Auxiliary", "1.9"),
            ("Draft Current FWD/AFT", "7.20/7.80"),
            ("Next port Name", "Port Louis"),
            ("Vessel State", ""),
        ]);
        for (k, v) in overrides {
            r.cells.insert(k.to_string(), v.to_string());
        }
        r
    }

    #[test]
    fn well_formed_rows_all_parse() {
        let rows: Vec<_> = (0..296).map(|_| row(&[])).collect();
        let out = parse_report_table(&rows, &ReportSchema::default(), &TzPolicy::Utc).unwrap();
        assert_eq!(out.records.len(), 296);
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn draft_split_and_units() {
        let out =
            parse_report_table(&[row(&[])], &ReportSchema::default(), &TzPolicy::Utc).unwrap();
        let r = &out.records[0];
        assert_eq!(r.draft_fwd, Cell::Present(7.2));
        assert_eq!(r.draft_aft, Cell::Present(7.8));
        assert!((r.propeller_slip.get().unwrap() - 0.045).abs() < 1e-15);
        assert_eq!(r.wind_dir, Cell::Present(Compass::NE));
        assert!(r.state_flags.is_empty());
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(
            parse_report_table(&[], &ReportSchema::default(), &TzPolicy::Utc),
            Err(ReportError::EmptyInput)
        );
    }

    #[test]
    fn missing_required_column() {
        let mut r = row(&[]);
        r.cells.shift_remove("Average RPM last 24hrs");
        assert!(matches!(
            parse_report_table(&[r], &ReportSchema::default(), &TzPolicy::Utc),
            Err(ReportError::MissingColumn(c)) if c == "Average RPM last 24hrs"
        ));
    }

    #[test]
    fn optional_cells_are_tri_state() {
        let r = row(&[
            ("Wind Force", ""),
            ("Swell Force", "14"),
            ("Current Speed", "fast"),
            ("ULSFO bunkers consumption last 24hrs - Boiler", "-0.2"),
        ]);
        let out = parse_report_table(&[r], &ReportSchema::default(), &TzPolicy::Utc).unwrap();
        let rec = &out.records[0];
        assert_eq!(rec.wind_force, Cell::Missing);
        assert_eq!(rec.swell_force, Cell::Rejected("14".into()));
        assert_eq!(rec.current_speed, Cell::Rejected("fast".into()));
        assert_eq!(rec.fuel_ulsfo_boiler, Cell::Rejected("-0.2".into()));
    }

    #[test]
    fn bad_rows_reported_with_context() {
        let rows = vec![
            row(&[]),
            row(&[("Wind Direction", "NORTHISH")]),
            row(&[("Date/time", "31 FEB 2022 1200LT")]),
            row(&[("Vessel State", "Bunkering Operation; Drifting")]),
        ];
        let out = parse_report_table(&rows, &ReportSchema::default(), &TzPolicy::Utc).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.rejected.len(), 2);
        assert_eq!(out.rejected[0].row, 1);
        assert_eq!(out.rejected[0].cell, "NORTHISH");
        assert_eq!(out.rejected[1].row, 2);
        let flags: Vec<_> = out.records[1].state_flags.iter().copied().collect();
        assert_eq!(flags, vec![StateFlag::Bunkering, StateFlag::Drifting]);
        // no record is both emitted and rejected
        for rej in &out.rejected {
            assert!(out.records.iter().all(|r| r.row != rej.row));
        }
    }

    #[test]
    fn csv_round_trip_with_embedded_newlines() {
        let rows = vec![row(&[]), row(&[("Vessel State", "Anchor")])];
        let schema = ReportSchema::default();
        let tz = TzPolicy::fixed_hours(1);
        let parsed = parse_report_table(&rows, &schema, &tz).unwrap();
        let mut buf = Vec::new();
        write_report_csv(&parsed.records, &schema, &tz, &mut buf).unwrap();
        let raw = read_report_csv(buf.as_slice(), b',').unwrap();
        assert_eq!(raw[0].cells["Geograph. position"], "02-16.0N\n101-52.5E");
        let again = parse_report_table(&raw, &schema, &tz).unwrap();
        assert_eq!(again.records, parsed.records);
    }
}
