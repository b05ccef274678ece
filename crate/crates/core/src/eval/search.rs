use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cross_validate, CvRow, EvalError, FoldAssignment};
use crate::models::{DesignMatrix, ModelSpec};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize mean R².
    #[default]
    R2,
    /// Minimize mean RMSE.
    Rmse,
}

impl Objective {
    pub fn score(self, row: &CvRow) -> f64 {
        match self {
            Objective::R2 => row.r2_mean(),
            Objective::Rmse => row.rmse_mean(),
        }
    }

    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Objective::R2 => a > b,
            Objective::Rmse => a < b,
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r2" => Ok(Objective::R2),
            "rmse" => Ok(Objective::Rmse),
            other => Err(EvalError::InvalidGrid(format!("unknown objective {other:?}"))),
        }
    }
}

/// Named axes of candidate hyperparameter values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperGrid {
    pub axes: IndexMap<String, Vec<serde_json::Value>>,
}

impl HyperGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis(mut self, name: &str, values: impl IntoIterator<Item = serde_json::Value>) -> Self {
        self.axes.insert(name.to_string(), values.into_iter().collect());
        self
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.values().map(Vec::len).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product; the last axis varies fastest.
    pub fn points(&self) -> Vec<IndexMap<String, serde_json::Value>> {
        let mut out = vec![IndexMap::new()];
        for (name, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|pt| {
                    values.iter().map(move |v| {
                        let mut pt = pt.clone();
                        pt.insert(name.clone(), v.clone());
                        pt
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: IndexMap<String, serde_json::Value>,
    pub spec: ModelSpec,
    pub cv: CvRow,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub objective: Objective,
    pub best: usize,
    pub table: Vec<GridPoint>,
}

impl GridSearchResult {
    pub fn best_point(&self) -> &GridPoint {
        &self.table[self.best]
    }

    /// One line per grid point: parameters as JSON, then the eight statistics.
    pub fn to_csv(&self) -> String {
        let mut s = format!("params,score,{}\n", super::STAT_COLUMNS.join(","));
        for p in &self.table {
            let params = serde_json::to_string(&p.params).expect("json values serialize");
            s.push_str(&format!("\"{}\",{:.6}", params.replace('"', "\"\""), p.score));
            for v in p.cv.stats() {
                s.push_str(&format!(",{v:.6}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Cross-validates every point of `grid` applied on top of `base`; the best
/// score wins and ties go to the earlier point.
pub fn grid_search<T: Scalar>(
    base: &ModelSpec,
    grid: &HyperGrid,
    d: &DesignMatrix<T>,
    folds: &FoldAssignment,
    objective: Objective,
    seed: u64,
) -> Result<GridSearchResult, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidGrid("grid has an empty axis or no axes".into()));
    }
    let specs = grid
        .points()
        .into_iter()
        .map(|params| {
            let mut spec = base.clone();
            for (k, v) in &params {
                spec = spec.set_param(k, v.clone()).map_err(EvalError::Model)?;
            }
            Ok((params, spec))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let table = specs
        .into_par_iter()
        .map(|(params, spec)| {
            let cv = cross_validate(&spec, d, folds, seed)?;
            let score = objective.score(&cv);
            Ok(GridPoint { params, spec, cv, score })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let mut best = 0;
    for (i, p) in table.iter().enumerate().skip(1) {
        if objective.better(p.score, table[best].score) {
            best = i;
        }
    }
    Ok(GridSearchResult { objective, best, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::kfold_split;
    use crate::models::{Family, RidgeParams};
    use serde_json::json;

    fn informative() -> DesignMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, ((i * 7) % 11) as f64]).collect();
        let y = rows.iter().map(|r| 3.0 * r[0] - r[1] + ((r[0] * 1.7).sin())).collect();
        DesignMatrix::unnamed(&rows, y).unwrap()
    }

    #[test]
    fn cartesian_order() {
        let g = HyperGrid::new().axis("a", [json!(1), json!(2)]).axis("b", [json!("x"), json!("y"), json!("z")]);
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1]["a"], json!(1));
        assert_eq!(pts[1]["b"], json!("y"));
        assert_eq!(pts[3]["a"], json!(2));
        assert!(HyperGrid::new().axis("a", []).is_empty());
    }

    #[test]
    fn shrinkage_loses() {
        let d = informative();
        let folds = kfold_split(d.n(), 5, 0).unwrap();
        let g = HyperGrid::new().axis("lambda", [json!(1e9), json!(0.0)]);
        let res = grid_search(&Family::Ridge.default_spec(), &g, &d, &folds, Objective::R2, 0).unwrap();
        assert_eq!(res.best_point().spec, ModelSpec::Ridge(RidgeParams { lambda: 0.0 }));
        let max = res.table.iter().map(|p| p.score).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.best_point().score, max);
        let rm = grid_search(&Family::Ridge.default_spec(), &g, &d, &folds, Objective::Rmse, 0).unwrap();
        assert_eq!(rm.best, 1);
    }

    #[test]
    fn ties_go_to_first_and_single_point() {
        let d = informative();
        let folds = kfold_split(d.n(), 4, 0).unwrap();
        let g = HyperGrid::new().axis("lambda", [json!(0.5), json!(0.5)]);
        let res = grid_search(&Family::Ridge.default_spec(), &g, &d, &folds, Objective::R2, 0).unwrap();
        assert_eq!(res.best, 0);
        let one = HyperGrid::new().axis("lambda", [json!(2.0)]);
        let res = grid_search(&Family::Ridge.default_spec(), &one, &d, &folds, Objective::R2, 0).unwrap();
        assert_eq!(res.best_point().params["lambda"], json!(2.0));
    }

    #[test]
    fn unknown_parameter_rejected() {
        let d = informative();
        let folds = kfold_split(d.n(), 4, 0).unwrap();
        let g = HyperGrid::new().axis("depth", [json!(2)]);
        assert!(grid_search(&Family::Ridge.default_spec(), &g, &d, &folds, Objective::R2, 0).is_err());
    }
}
