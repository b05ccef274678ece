use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{adjust_r2, mae, r2, rmse};
use super::{EvalError, FoldAssignment};
use crate::models::{derive_seed, DesignMatrix, FittedModel, ModelSpec};
use crate::scalar::sample_std;
use crate::Scalar;

/// Column order of every report, CSV and text alike.
pub const STAT_COLUMNS: [&str; 8] =
    ["r2_mean", "r2_std", "adj_r2_mean", "adj_r2_std", "rmse_mean", "rmse_std", "mae_mean", "mae_std"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldScores {
    pub r2: f64,
    /// `NaN` when the test fold has `n <= p + 1`.
    pub adj_r2: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n_test: usize,
}

/// One model's fold scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub model: String,
    pub n_features: usize,
    pub folds: Vec<FoldScores>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl CvRow {
    fn column(&self, f: impl Fn(&FoldScores) -> f64) -> Vec<f64> {
        self.folds.iter().map(f).collect()
    }

    /// The eight statistics in [`STAT_COLUMNS`] order; std uses `k - 1`.
    pub fn stats(&self) -> [f64; 8] {
        let cols = [
            self.column(|s| s.r2),
            self.column(|s| s.adj_r2),
            self.column(|s| s.rmse),
            self.column(|s| s.mae),
        ];
        let mut out = [0.0; 8];
        for (k, c) in cols.iter().enumerate() {
            out[2 * k] = mean(c);
            out[2 * k + 1] = sample_std(c);
        }
        out
    }

    pub fn r2_mean(&self) -> f64 {
        self.stats()[0]
    }

    pub fn rmse_mean(&self) -> f64 {
        self.stats()[4]
    }
}

/// Rows of a comparison table, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub rows: Vec<CvRow>,
}

impl CvReport {
    pub fn get(&self, model: &str) -> Option<&CvRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("model,{}\n", STAT_COLUMNS.join(","));
        for row in &self.rows {
            s.push_str(&row.model);
            for v in row.stats() {
                let _ = write!(s, ",{v:.6}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_text_table(&self) -> String {
        let w0 = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(0).max("model".len());
        let mut s = format!("{:<w0$}", "model");
        for c in STAT_COLUMNS {
            let _ = write!(s, "  {c:>11}");
        }
        s.push('\n');
        for row in &self.rows {
            let _ = write!(s, "{:<w0$}", row.model);
            for v in row.stats() {
                let _ = write!(s, "  {v:>11.6}");
            }
            s.push('\n');
        }
        s
    }
}

/// Fits `spec` on the training rows of fold `f` with the fold's derived seed.
pub fn fit_fold<T: Scalar>(
    spec: &ModelSpec,
    d: &DesignMatrix<T>,
    folds: &FoldAssignment,
    f: usize,
    seed: u64,
) -> Result<FittedModel<T>, EvalError> {
    let tag = |source| EvalError::Fit { fold: f, source };
    let train = d.select_rows(&folds.train_indices(f)).map_err(tag)?;
    spec.fit(&train, derive_seed(seed, f as u64)).map_err(tag)
}

/// Scores `spec` on every fold (folds evaluated in parallel, results in
/// fold order).
pub fn cross_validate<T: Scalar>(
    spec: &ModelSpec,
    d: &DesignMatrix<T>,
    folds: &FoldAssignment,
    seed: u64,
) -> Result<CvRow, EvalError> {
    if folds.n() != d.n() {
        return Err(EvalError::LengthMismatch(folds.n(), d.n()));
    }
    let p = d.p();
    let folds_out: Vec<FoldScores> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            let model = fit_fold(spec, d, folds, f, seed)?;
            let test = d
                .select_rows(&folds.test_indices(f))
                .map_err(|source| EvalError::Fit { fold: f, source })?;
            let yhat = model.predict(&test).map_err(|source| EvalError::Fit { fold: f, source })?;
            let y = test.y();
            let r = r2(y, &yhat)?.to_f64_lossy();
            let n = y.len();
            let adj = if n > p + 1 { adjust_r2(r, n, p) } else { f64::NAN };
            Ok(FoldScores {
                r2: r,
                adj_r2: adj,
                rmse: rmse(y, &yhat)?.to_f64_lossy(),
                mae: mae(y, &yhat)?.to_f64_lossy(),
                n_test: n,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(CvRow { model: spec.family().label().to_string(), n_features: p, folds: folds_out })
}
