//! Metrics, k-fold cross-validation, grid search and the family
//! comparison tables.

mod cv;
mod folds;
mod metrics;
mod search;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::models::{DesignMatrix, Family, ModelError, ModelSpec};
use crate::Scalar;

pub use cv::{cross_validate, fit_fold, CvReport, CvRow, FoldScores, STAT_COLUMNS};
pub use folds::{kfold_split, FoldAssignment};
pub use metrics::{adjusted_r2, mae, r2, rmse};
pub use search::{grid_search, GridPoint, GridSearchResult, HyperGrid, Objective};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("k={k} invalid for n={n} (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("response has zero variance")]
    DegenerateVariance,
    #[error("adjusted R² undefined for n={n}, p={p}")]
    BadDof { n: usize, p: usize },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fold {fold}: {source}")]
    Fit { fold: usize, source: ModelError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Cross-validates each spec on the same folds; one report row per spec.
pub fn compare_families<T: Scalar>(
    d: &DesignMatrix<T>,
    specs: &[ModelSpec],
    folds: &FoldAssignment,
    seed: u64,
) -> Result<CvReport, EvalError> {
    let rows = specs.iter().map(|s| cross_validate(s, d, folds, seed)).collect::<Result<_, _>>()?;
    Ok(CvReport { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub rpm_column: String,
    /// Also run the single-feature protocol on this column when set.
    pub sog_column: Option<String>,
    pub k: usize,
    pub seed: u64,
    pub specs: Vec<ModelSpec>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            rpm_column: "engine_rpm_avg_24h".into(),
            sog_column: None,
            k: 5,
            seed: 0,
            specs: Family::FOUR.iter().map(|f| f.default_spec()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub rpm: CvReport,
    pub sog: Option<CvReport>,
}

/// Every family on the single-feature matrix `[engine rpm]` (and optionally
/// `[sog]`), all on the same folds.
pub fn baseline_protocol<T: Scalar>(d: &DesignMatrix<T>, cfg: &ProtocolConfig) -> Result<BaselineReport, EvalError> {
    let folds = kfold_split(d.n(), cfg.k, cfg.seed)?;
    let single = |col: &str| -> Result<CvReport, EvalError> {
        let j = d.column_index(col).ok_or_else(|| EvalError::MissingColumn(col.to_string()))?;
        let sub = d.select_columns(&[j])?;
        compare_families(&sub, &cfg.specs, &folds, cfg.seed)
    };
    let rpm = single(&cfg.rpm_column)?;
    let sog = cfg.sog_column.as_deref().map(single).transpose()?;
    Ok(BaselineReport { rpm, sog })
}

/// Every family on all columns of `d`.
pub fn advanced_protocol<T: Scalar>(d: &DesignMatrix<T>, cfg: &ProtocolConfig) -> Result<CvReport, EvalError> {
    let folds = kfold_split(d.n(), cfg.k, cfg.seed)?;
    compare_families(d, &cfg.specs, &folds, cfg.seed)
}

/// Built-in search space per family.
pub fn default_grid(family: Family) -> HyperGrid {
    match family {
        Family::Ridge => HyperGrid::new().axis("lambda", [json!(0.01), json!(0.1), json!(1.0), json!(10.0), json!(100.0)]),
        Family::Svr => HyperGrid::new()
            .axis("c", [json!(1.0), json!(10.0), json!(100.0)])
            .axis("epsilon", [json!(0.1), json!(0.5), json!(1.0)]),
        Family::Forest => HyperGrid::new()
            .axis("n_trees", [json!(50), json!(100), json!(200)])
            .axis("max_depth", [json!(null), json!(8), json!(4)])
            .axis("features_per_split", [json!(null), json!(0.5)]),
        Family::Boost => HyperGrid::new()
            .axis("rounds", [json!(50), json!(100), json!(200)])
            .axis("eta", [json!(0.05), json!(0.1), json!(0.3)])
            .axis("max_depth", [json!(3), json!(6)]),
        Family::Mean => HyperGrid::new(),
    }
}
