use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, SplitRule, TreeModel};
use super::{derive_seed, DesignMatrix, ModelError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features tried per split: `None` = all, a value >= 1 is a count, a
    /// value in (0, 1) is a fraction of the columns.
    pub features_per_split: Option<f64>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: None, min_samples_leaf: 1, features_per_split: None, bootstrap: true }
    }
}

impl ForestParams {
    fn resolve_features(&self, p: usize) -> Result<usize, ModelError> {
        match self.features_per_split {
            None => Ok(p),
            Some(v) if v >= 1.0 && v.is_finite() => Ok((v.round() as usize).min(p)),
            Some(v) if v > 0.0 && v < 1.0 => Ok(((v * p as f64).floor() as usize).max(1)),
            Some(v) => Err(ModelError::InvalidParameter(format!("features_per_split must be > 0, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<T> {
    pub trees: Vec<TreeModel<T>>,
    pub bootstrap_seed: u64,
    pub bootstrap: bool,
    pub features_per_split: usize,
    pub n_features: usize,
}

/// Bagged CART regression trees. Tree `t` draws its bootstrap sample and
/// feature subsets from `derive_seed(seed, t)`, so the result does not
/// depend on thread scheduling.
pub fn forest_fit<T: Scalar>(d: &DesignMatrix<T>, params: &ForestParams, seed: u64) -> Result<ForestModel<T>, ModelError> {
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParameter("n_trees must be >= 1".into()));
    }
    if params.min_samples_leaf == 0 {
        return Err(ModelError::InvalidParameter("min_samples_leaf must be >= 1".into()));
    }
    let m = params.resolve_features(d.p())?;
    let grow_params = GrowParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        lambda: T::zero(),
        rule: SplitRule::Impure,
        features_per_split: Some(m),
    };
    let n = d.n();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(d, d.y(), rows, &grow_params, &mut rng)
        })
        .collect();
    Ok(ForestModel { trees, bootstrap_seed: seed, bootstrap: params.bootstrap, features_per_split: m, n_features: d.p() })
}

impl<T: Scalar> ForestModel<T> {
    /// Mean of the tree outputs.
    pub fn predict_row(&self, x: &[T]) -> T {
        let s: T = self.trees.iter().map(|t| t.predict_row(x)).sum();
        s / T::from_usize_lossy(self.trees.len())
    }
}

/// Mean decrease in variance impurity per feature, averaged over trees and
/// normalized to sum to 1 (all zeros when no tree split).
pub fn forest_feature_importance<T: Scalar>(model: &ForestModel<T>, d: &DesignMatrix<T>) -> Result<Vec<T>, ModelError> {
    d.check_width(model.n_features)?;
    let mut imp = vec![T::zero(); model.n_features];
    for t in &model.trees {
        for (a, b) in imp.iter_mut().zip(t.impurity_decrease()) {
            *a += b;
        }
    }
    let total: T = imp.iter().copied().sum();
    if total > T::zero() {
        imp.iter_mut().for_each(|v| *v /= total);
    }
    Ok(imp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_data(seed: u64, n: usize, p: usize, f: impl Fn(&[f64]) -> f64) -> DesignMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let y = rows.iter().map(|r| f(r)).collect();
        DesignMatrix::unnamed(&rows, y).unwrap()
    }

    #[test]
    fn single_unbagged_tree_memorizes() {
        let d = random_data(3, 60, 3, |r| r[0] * 10.0 + r[1]);
        let p = ForestParams { n_trees: 1, bootstrap: false, ..Default::default() };
        let f = forest_fit(&d, &p, 0).unwrap();
        for i in 0..d.n() {
            assert_eq!(f.predict_row(d.row(i)), d.y()[i]);
        }
        assert_eq!(f.predict_row(d.row(5)), f.trees[0].predict_row(d.row(5)));
    }

    #[test]
    fn constant_response() {
        let d = random_data(4, 30, 2, |_| 7.5);
        let f = forest_fit(&d, &ForestParams { n_trees: 10, ..Default::default() }, 1).unwrap();
        for i in 0..d.n() {
            assert_eq!(f.predict_row(d.row(i)), 7.5);
        }
        assert_eq!(forest_feature_importance(&f, &d).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn two_point_stump() {
        let d = DesignMatrix::unnamed(&[vec![0.0], vec![1.0]], vec![3.0, 5.0]).unwrap();
        let p = ForestParams { n_trees: 1, max_depth: Some(1), bootstrap: false, ..Default::default() };
        let f = forest_fit(&d, &p, 0).unwrap();
        assert_eq!(f.trees[0].nodes.len(), 3);
        assert_eq!(f.predict_row(&[0.4]), 3.0);
        assert_eq!(f.predict_row(&[0.6]), 5.0);
        assert_eq!(forest_feature_importance(&f, &d).unwrap(), vec![1.0]);
    }

    #[test]
    fn importance_finds_the_signal() {
        let d = random_data(11, 200, 4, |r| r[0]);
        let f = forest_fit(&d, &ForestParams { n_trees: 50, ..Default::default() }, 2).unwrap();
        let imp = forest_feature_importance(&f, &d).unwrap();
        assert!(imp[0] > 0.9, "{imp:?}");
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_forest_and_prediction_is_convex() {
        let d = random_data(5, 80, 3, |r| r[0] * r[1] + r[2]);
        let p = ForestParams { n_trees: 20, features_per_split: Some(0.5), ..Default::default() };
        let a = forest_fit(&d, &p, 9).unwrap();
        let b = forest_fit(&d, &p, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.features_per_split, 1);
        let c = forest_fit(&d, &p, 10).unwrap();
        assert_ne!(a, c);
        for i in 0..d.n() {
            let preds: Vec<f64> = a.trees.iter().map(|t| t.predict_row(d.row(i))).collect();
            let lo = preds.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = preds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let v = a.predict_row(d.row(i));
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn bad_params() {
        let d = random_data(1, 5, 1, |r| r[0]);
        assert!(forest_fit(&d, &ForestParams { n_trees: 0, ..Default::default() }, 0).is_err());
        assert!(forest_fit(&d, &ForestParams { features_per_split: Some(-1.0), ..Default::default() }, 0).is_err());
    }
}
