use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Column, ColumnKind, FusedDataset, PipelineError, Value};
use crate::report::Compass;

/// A dataset transformation whose parameters are learned by `fit` and only
/// applied by `transform`.
pub trait Step: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn fit(&mut self, d: &FusedDataset) -> Result<(), PipelineError>;
    fn transform(&self, d: &FusedDataset) -> Result<FusedDataset, PipelineError>;

    fn fit_transform(&mut self, d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
        self.fit(d)?;
        self.transform(d)
    }
}

/// Columns dropped by default: the fuel components the response is summed
/// from, the port name, and current speed (tracks speed over ground).
pub const DEFAULT_REDUNDANT: [&str; 8] = [
    "fuel_ulsfo_me",
    "fuel_ulsfo_boiler",
    "fuel_mgo_me",
    "fuel_mgo_boiler",
    "fuel_mgo_aux",
    "fuel_me",
    "next_port",
    "current_speed",
];

fn present_nums(d: &FusedDataset, j: usize) -> Vec<f64> {
    d.column_values(j).filter_map(Value::num).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneColumns {
    pub missing_threshold: f64,
    pub redundant: Vec<String>,
    #[serde(skip)]
    pub dropped: Option<Vec<String>>,
}

impl Default for PruneColumns {
    fn default() -> Self {
        Self { missing_threshold: 0.05, redundant: DEFAULT_REDUNDANT.iter().map(|s| s.to_string()).collect(), dropped: None }
    }
}

impl Step for PruneColumns {
    fn name(&self) -> &'static str {
        "prune_columns"
    }

    fn fit(&mut self, d: &FusedDataset) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.missing_threshold) {
            return Err(PipelineError::BadParameter(format!("missing_threshold {}", self.missing_threshold)));
        }
        let n = d.n_rows().max(1) as f64;
        let mut dropped = Vec::new();
        for (j, c) in d.columns.iter().enumerate() {
            let too_sparse = d.missing_count(j) as f64 / n > self.missing_threshold;
            let constant = match c.kind {
                ColumnKind::Categorical => {
                    let distinct: HashSet<&String> = d
                        .column_values(j)
                        .filter_map(|v| if let Value::Cat(s) = v { Some(s) } else { None })
                        .collect();
                    distinct.len() <= 1
                }
                _ => {
                    let v = present_nums(d, j);
                    v.windows(2).all(|w| w[0] == w[1])
                }
            };
            if too_sparse || constant || self.redundant.contains(&c.name) {
                if c.kind == ColumnKind::Response {
                    return Err(PipelineError::ResponseDropped(c.name.clone()));
                }
                dropped.push(c.name.clone());
            }
        }
        self.dropped = Some(dropped);
        Ok(())
    }

    fn transform(&self, d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
        let dropped = self.dropped.as_ref().ok_or_else(|| PipelineError::NotFitted(self.name().into()))?;
        Ok(d.select_columns(|j| !dropped.contains(&d.columns[j].name)))
    }
}

/// Drops sparse (> `missing_threshold` missing), constant and listed columns.
/// Returns the pruned dataset and the dropped names.
pub fn prune_columns(
    d: &FusedDataset,
    missing_threshold: f64,
    redundant: &[String],
) -> Result<(FusedDataset, Vec<String>), PipelineError> {
    let mut s = PruneColumns { missing_threshold, redundant: redundant.to_vec(), dropped: None };
    let out = s.fit_transform(d)?;
    Ok((out, s.dropped.unwrap_or_default()))
}

/// Outlier rule on the response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutlierMethod {
    /// Outside `[Q1 - k IQR, Q3 + k IQR]`.
    Iqr { k: f64 },
    /// `|z| > k` with the population standard deviation.
    ZScore { k: f64 },
}

impl Default for OutlierMethod {
    fn default() -> Self {
        OutlierMethod::Iqr { k: 1.5 }
    }
}

impl FromStr for OutlierMethod {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PipelineError::BadParameter(format!("outlier method {s:?} (expected iqr:K or zscore:K)"));
        let (m, k) = s.split_once(':').ok_or_else(bad)?;
        let k: f64 = k.trim().parse().map_err(|_| bad())?;
        if !(k >= 0.0) {
            return Err(bad());
        }
        match m.trim().to_ascii_lowercase().as_str() {
            "iqr" => Ok(OutlierMethod::Iqr { k }),
            "zscore" | "z" => Ok(OutlierMethod::ZScore { k }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for OutlierMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutlierMethod::Iqr { k } => write!(f, "iqr:{k}"),
            OutlierMethod::ZScore { k } => write!(f, "zscore:{k}"),
        }
    }
}

impl Serialize for OutlierMethod {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OutlierMethod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoveResponseOutliers {
    pub method: OutlierMethod,
    /// Learned `(low, high)` fence.
    #[serde(skip)]
    pub fence: Option<(f64, f64)>,
}

impl Step for RemoveResponseOutliers {
    fn name(&self) -> &'static str {
        "remove_response_outliers"
    }

    fn fit(&mut self, d: &FusedDataset) -> Result<(), PipelineError> {
        let r = d.response_index().ok_or_else(|| PipelineError::MissingColumn("<response>".into()))?;
        let mut v = present_nums(d, r);
        if v.is_empty() {
            self.fence = Some((f64::NEG_INFINITY, f64::INFINITY));
            return Ok(());
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite response"));
        self.fence = Some(match self.method {
            OutlierMethod::Iqr { k } => {
                let (q1, q3) = (quantile(&v, 0.25), quantile(&v, 0.75));
                let iqr = q3 - q1;
                if k.is_infinite() {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else {
                    (q1 - k * iqr, q3 + k * iqr)
                }
            }
            OutlierMethod::ZScore { k } => {
                let m = crate::scalar::mean(&v).expect("non-empty");
                let sd = crate::scalar::variance(&v).expect("non-empty").sqrt();
                if k.is_infinite() || sd == 0.0 {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else {
                    (m - k * sd, m + k * sd)
                }
            }
        });
        Ok(())
    }

    fn transform(&self, d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
        let (lo, hi) = self.fence.ok_or_else(|| PipelineError::NotFitted(self.name().into()))?;
        let r = d.response_index().ok_or_else(|| PipelineError::MissingColumn("<response>".into()))?;
        Ok(d.filter_rows(|i| d.rows[i][r].num().is_none_or(|y| y >= lo && y <= hi)))
    }
}

/// Removes rows whose response lies outside the fence of `method`; returns
/// the dataset and the number of rows removed.
pub fn remove_response_outliers(d: &FusedDataset, method: OutlierMethod) -> Result<(FusedDataset, usize), PipelineError> {
    let mut s = RemoveResponseOutliers { method, fence: None };
    let out = s.fit_transform(d)?;
    let removed = d.n_rows() - out.n_rows();
    Ok((out, removed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StartupFilter {
    /// t/day
    pub min_fuel: f64,
    /// knots
    pub min_speed: f64,
    pub speed_column: String,
}

impl Default for StartupFilter {
    fn default() -> Self {
        Self { min_fuel: 15.0, min_speed: 8.0, speed_column: "sog_avg_24h".into() }
    }
}

impl Step for StartupFilter {
    fn name(&self) -> &'static str {
        "filter_startup_acceleration"
    }

    fn fit(&mut self, _: &FusedDataset) -> Result<(), PipelineError> {
        Ok(())
    }

    fn transform(&self, d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
        let r = d.response_index().ok_or_else(|| PipelineError::MissingColumn("<response>".into()))?;
        let s = d.require(&self.speed_column)?;
        Ok(d.filter_rows(|i| {
            let row = &d.rows[i];
            match (row[s].num(), row[r].num()) {
                (Some(sog), Some(fc)) => !(sog >= self.min_speed && fc < self.min_fuel),
                _ => true,
            }
        }))
    }
}

/// Removes rows with speed `>= min_speed` and response `< min_fuel`.
pub fn filter_startup_acceleration(d: &FusedDataset, min_fuel: f64, min_speed: f64) -> Result<FusedDataset, PipelineError> {
    StartupFilter { min_fuel, min_speed, ..Default::default() }.fit_transform(d)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DropIncompleteRows;

impl Step for DropIncompleteRows {
    fn name(&self) -> &'static str {
        "drop_incomplete_rows"
    }

    fn fit(&mut self, _: &FusedDataset) -> Result<(), PipelineError> {
        Ok(())
    }

    fn transform(&self, d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
        Ok(d.filter_rows(|i| d.rows[i].iter().all(|v| !v.is_missing())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Encoding {
    /// `(sin, cos)` of the bearing.
    Cyclic,
    /// One indicator per category, in first-seen order.
    OneHot(Vec<String>),
}

/// Compass columns (unit `compass`) become a sine/cosine pair, every other
/// categorical column is one-hot encoded with the categories seen in `fit`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodeCategoricals {
    #[serde(skip)]
    plan: Option<Vec<(String, Encoding)>>,
}

impl Step for EncodeCategoricals {
    fn name(&self) -> &'static str {
        "encode_categoricals"
    }

    fn fit(&mut self, d: &FusedDataset) -> Result<(), PipelineError> {
        let mut plan = Vec::new();
        for (j, c) in d.columns.iter().enumerate() {
            if c.kind != ColumnKind::Categorical {
                continue;
            }
            let enc = if c.unit == "compass" {
                Encoding::Cyclic
            } else {
                let mut cats: Vec<String> = Vec::new();
                for v in d.column_values(j) {
                    if let Value::Cat(s) = v {
                        if !cats.contains(s) {
                            cats.push(s.clone());
                        }
                    }
                }
                Encoding::OneHot(cats)
            };
            plan.push((c.name.clone(), enc));
        }
        self.plan = Some(plan);
        Ok(())
    }

    fn transform(&self, d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
        let plan = self.plan.as_ref().ok_or_else(|| PipelineError::NotFitted(self.name().into()))?;
        let mut columns = Vec::new();
        let mut rows: Vec<Vec<Value>> = vec![Vec::new(); d.n_rows()];
        for (j, c) in d.columns.iter().enumerate() {
            let Some((_, enc)) = plan.iter().find(|(n, _)| *n == c.name) else {
                if c.kind == ColumnKind::Categorical {
                    return Err(PipelineError::NotFitted(format!("{} (column {})", self.name(), c.name)));
                }
                columns.push(c.clone());
                for (out, row) in rows.iter_mut().zip(&d.rows) {
                    out.push(row[j].clone());
                }
                continue;
            };
            match enc {
                Encoding::Cyclic => {
                    columns.push(Column::new(&format!("{}_sin", c.name), "1", ColumnKind::Numeric));
                    columns.push(Column::new(&format!("{}_cos", c.name), "1", ColumnKind::Numeric));
                    for (out, row) in rows.iter_mut().zip(&d.rows) {
                        match &row[j] {
                            Value::Cat(s) => {
                                let dir: Compass = s.parse().map_err(|_| PipelineError::UnknownCategory {
                                    column: c.name.clone(),
                                    value: s.clone(),
                                })?;
                                let (sn, cs) = dir.sin_cos();
                                out.extend([Value::Num(sn), Value::Num(cs)]);
                            }
                            Value::Missing => out.extend([Value::Missing, Value::Missing]),
                            Value::Num(v) => {
                                return Err(PipelineError::UnknownCategory { column: c.name.clone(), value: v.to_string() })
                            }
                        }
                    }
                }
                Encoding::OneHot(cats) => {
                    for cat in cats {
                        columns.push(Column::new(&format!("{}_{cat}", c.name), "indicator", ColumnKind::Numeric));
                    }
                    for (out, row) in rows.iter_mut().zip(&d.rows) {
                        match &row[j] {
                            Value::Cat(s) => out.extend(cats.iter().map(|k| Value::Num(if k == s { 1.0 } else { 0.0 }))),
                            Value::Missing => out.extend(cats.iter().map(|_| Value::Missing)),
                            Value::Num(v) => {
                                return Err(PipelineError::UnknownCategory { column: c.name.clone(), value: v.to_string() })
                            }
                        }
                    }
                }
            }
        }
        Ok(FusedDataset { columns, rows, keys: d.keys.clone() })
    }
}

pub fn encode_categoricals(d: &FusedDataset) -> Result<FusedDataset, PipelineError> {
    EncodeCategoricals::default().fit_transform(d)
}

/// Serializable step list entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum StepSpec {
    PruneColumns(PruneColumns),
    RemoveResponseOutliers(RemoveResponseOutliers),
    FilterStartupAcceleration(StartupFilter),
    DropIncompleteRows,
    EncodeCategoricals,
}

impl StepSpec {
    pub fn build(&self) -> Box<dyn Step> {
        match self {
            StepSpec::PruneColumns(s) => Box::new(s.clone()),
            StepSpec::RemoveResponseOutliers(s) => Box::new(s.clone()),
            StepSpec::FilterStartupAcceleration(s) => Box::new(s.clone()),
            StepSpec::DropIncompleteRows => Box::new(DropIncompleteRows),
            StepSpec::EncodeCategoricals => Box::new(EncodeCategoricals::default()),
        }
    }

    pub fn default_list() -> Vec<StepSpec> {
        vec![
            StepSpec::PruneColumns(PruneColumns::default()),
            StepSpec::RemoveResponseOutliers(RemoveResponseOutliers::default()),
            StepSpec::FilterStartupAcceleration(StartupFilter::default()),
            StepSpec::DropIncompleteRows,
            StepSpec::EncodeCategoricals,
        ]
    }
}
