use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::models::DesignMatrix;
use crate::report::GeoPosition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Response,
}

impl ColumnKind {
    fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Response => "response",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, unit: &str, kind: ColumnKind) -> Self {
        Self { name: name.to_string(), unit: unit.to_string(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Num(f64),
    Cat(String),
    Missing,
}

impl Value {
    pub fn num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn from_opt(v: Option<f64>) -> Self {
        v.map_or(Value::Missing, Value::Num)
    }
}

/// Identity of a row: source report index, time and place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowKey {
    pub row: usize,
    pub timestamp_utc: DateTime<Utc>,
    pub position: GeoPosition,
}

/// Rows of values under ordered column metadata; exactly one column has
/// kind [`ColumnKind::Response`].
#[derive(Debug, Clone, PartialEq)]
pub struct FusedDataset {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
    pub keys: Vec<RowKey>,
}

impl FusedDataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, PipelineError> {
        self.column_index(name).ok_or_else(|| PipelineError::MissingColumn(name.to_string()))
    }

    pub fn response_index(&self) -> Option<usize> {
        self.columns.iter().position(|c| c.kind == ColumnKind::Response)
    }

    pub fn response_name(&self) -> Option<&str> {
        self.response_index().map(|j| self.columns[j].name.as_str())
    }

    pub fn column_values(&self, j: usize) -> impl Iterator<Item = &Value> {
        self.rows.iter().map(move |r| &r[j])
    }

    pub fn missing_count(&self, j: usize) -> usize {
        self.column_values(j).filter(|v| v.is_missing()).count()
    }

    /// Keeps the rows where `keep(i)` is true.
    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> FusedDataset {
        let idx: Vec<usize> = (0..self.n_rows()).filter(|&i| keep(i)).collect();
        self.select_rows(&idx)
    }

    pub fn select_rows(&self, idx: &[usize]) -> FusedDataset {
        FusedDataset {
            columns: self.columns.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            keys: idx.iter().map(|&i| self.keys[i]).collect(),
        }
    }

    /// Keeps the columns where `keep(j)` is true.
    pub fn select_columns(&self, keep: impl Fn(usize) -> bool) -> FusedDataset {
        let idx: Vec<usize> = (0..self.columns.len()).filter(|&j| keep(j)).collect();
        FusedDataset {
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j].clone()).collect()).collect(),
            keys: self.keys.clone(),
        }
    }

    pub fn push_column(&mut self, col: Column, values: Vec<Value>) {
        assert_eq!(values.len(), self.rows.len(), "one value per row");
        self.columns.push(col);
        for (r, v) in self.rows.iter_mut().zip(values) {
            r.push(v);
        }
    }

    /// Numeric feature columns (every non-response column) and the response
    /// as a design matrix. Fails on categorical or missing cells.
    pub fn to_design_matrix(&self) -> Result<DesignMatrix<f64>, PipelineError> {
        let resp = self.response_index().ok_or_else(|| PipelineError::MissingColumn("<response>".into()))?;
        if self.rows.is_empty() {
            return Err(PipelineError::Empty);
        }
        let feats: Vec<usize> = (0..self.columns.len()).filter(|&j| j != resp).collect();
        for &j in &feats {
            if self.columns[j].kind != ColumnKind::Numeric {
                return Err(PipelineError::NotNumeric(self.columns[j].name.clone()));
            }
        }
        let mut x = Vec::with_capacity(self.rows.len() * feats.len());
        let mut y = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            for &j in feats.iter().chain(std::iter::once(&resp)) {
                let v = match &r[j] {
                    Value::Num(v) => *v,
                    Value::Missing => {
                        return Err(PipelineError::MissingValue { row: self.keys[i].row, column: self.columns[j].name.clone() })
                    }
                    Value::Cat(_) => return Err(PipelineError::NotNumeric(self.columns[j].name.clone())),
                };
                if j == resp {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
        }
        let names = feats.iter().map(|&j| self.columns[j].name.clone()).collect();
        Ok(DesignMatrix::from_flat(x, y, names)?)
    }
}

const KEY_HEADERS: [&str; 4] = ["row|index|key", "timestamp_utc|iso8601|key", "key_lat|deg|key", "key_lon|deg|key"];

/// Writes `name|unit|kind` header cells after four key columns; missing
/// cells are empty, numbers use the shortest round-trip form.
pub fn write_fused_csv<W: Write>(d: &FusedDataset, w: W) -> Result<(), PipelineError> {
    let err = |e: csv::Error| PipelineError::Format(e.to_string());
    let mut wr = csv::Writer::from_writer(w);
    let header: Vec<String> = KEY_HEADERS
        .iter()
        .map(|s| s.to_string())
        .chain(d.columns.iter().map(|c| format!("{}|{}|{}", c.name, c.unit, c.kind.as_str())))
        .collect();
    wr.write_record(&header).map_err(err)?;
    for (k, r) in d.keys.iter().zip(&d.rows) {
        let mut rec = vec![
            k.row.to_string(),
            k.timestamp_utc.to_rfc3339_opts(SecondsFormat::Secs, true),
            k.position.lat.to_string(),
            k.position.lon.to_string(),
        ];
        rec.extend(r.iter().map(|v| match v {
            Value::Num(x) => x.to_string(),
            Value::Cat(s) => s.clone(),
            Value::Missing => String::new(),
        }));
        wr.write_record(&rec).map_err(err)?;
    }
    wr.flush().map_err(|e| PipelineError::Format(e.to_string()))
}

pub fn read_fused_csv<R: Read>(r: R) -> Result<FusedDataset, PipelineError> {
    let fmt = |m: String| PipelineError::Format(m);
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(|e| fmt(e.to_string()))?.clone();
    if header.len() < KEY_HEADERS.len() || header.iter().take(4).ne(KEY_HEADERS.iter().copied()) {
        return Err(fmt("missing key columns".into()));
    }
    let columns = header
        .iter()
        .skip(4)
        .map(|h| {
            let parts: Vec<&str> = h.split('|').collect();
            let [name, unit, kind] = parts[..] else {
                return Err(fmt(format!("bad header cell {h:?}")));
            };
            let kind = match kind {
                "numeric" => ColumnKind::Numeric,
                "categorical" => ColumnKind::Categorical,
                "response" => ColumnKind::Response,
                k => return Err(fmt(format!("bad column kind {k:?}"))),
            };
            Ok(Column::new(name, unit, kind))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut keys = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| fmt(format!("{:?}: {e}", &rec[i])));
        let row = rec[0].parse::<usize>().map_err(|e| fmt(e.to_string()))?;
        let ts = DateTime::parse_from_rfc3339(&rec[1]).map_err(|e| fmt(e.to_string()))?.with_timezone(&Utc);
        let position = GeoPosition::new(num(2)?, num(3)?).map_err(|e| fmt(e.to_string()))?;
        keys.push(RowKey { row, timestamp_utc: ts, position });
        let vals = columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let cell = &rec[j + 4];
                Ok(if cell.is_empty() {
                    Value::Missing
                } else if c.kind == ColumnKind::Categorical {
                    Value::Cat(cell.to_string())
                } else {
                    Value::Num(num(j + 4)?)
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        rows.push(vals);
    }
    Ok(FusedDataset { columns, rows, keys })
}
