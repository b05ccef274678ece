//! Second-order gradient boosting for squared error.
//!
//! With loss `½(y - ŷ)²` the gradient is `ŷ - y` and the hessian is 1, so a
//! leaf holding rows `I` gets weight `-G/(H + λ) = Σ r_i / (|I| + λ)` on the
//! residuals `r`. The stored leaf values already include the shrinkage η.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow, GrowParams, SplitRule, TreeModel};
use super::{DesignMatrix, ModelError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub rounds: usize,
    pub eta: f64,
    /// Penalty per leaf.
    pub gamma_leaf: f64,
    /// L2 penalty on leaf weights.
    pub lambda_leaf: f64,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Initial prediction; `None` uses the training mean.
    pub base_score: Option<f64>,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            eta: 0.3,
            gamma_leaf: 0.0,
            lambda_leaf: 1.0,
            max_depth: Some(6),
            min_samples_leaf: 1,
            base_score: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel<T> {
    pub trees: Vec<TreeModel<T>>,
    pub base_score: T,
    pub eta: T,
    pub gamma_leaf: T,
    pub lambda_leaf: T,
    /// Rounds requested; `trees.len()` is smaller when boosting stopped early.
    pub rounds: usize,
    pub n_features: usize,
    /// Regularized training objective before the first tree and after each
    /// accepted tree.
    pub objective_trace: Vec<T>,
}

/// Fits `rounds` trees, stopping early once a new tree would not lower the
/// regularized objective `Σ ½(y - ŷ)² + Σ_k (γ T_k + ½ λ Σ w²)`.
pub fn boost_fit<T: Scalar>(d: &DesignMatrix<T>, params: &BoostParams) -> Result<BoostedModel<T>, ModelError> {
    if params.rounds == 0 {
        return Err(ModelError::InvalidParameter("rounds must be >= 1".into()));
    }
    if !(params.eta > 0.0 && params.eta <= 1.0) {
        return Err(ModelError::InvalidParameter(format!("eta must be in (0, 1], got {}", params.eta)));
    }
    if !(params.lambda_leaf >= 0.0) || !(params.gamma_leaf >= 0.0) {
        return Err(ModelError::InvalidParameter("lambda_leaf and gamma_leaf must be >= 0".into()));
    }
    if params.min_samples_leaf == 0 {
        return Err(ModelError::InvalidParameter("min_samples_leaf must be >= 1".into()));
    }
    let (eta, gamma, lambda) = (T::lit(params.eta), T::lit(params.gamma_leaf), T::lit(params.lambda_leaf));
    let half = T::lit(0.5);
    let y = d.y();
    let base = match params.base_score {
        Some(b) => T::lit(b),
        None => crate::scalar::mean(y).expect("n >= 1"),
    };
    let grow_params = GrowParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        lambda,
        rule: SplitRule::GainAbove { gamma },
        features_per_split: None,
    };
    let loss = |pred: &[T]| -> T { y.iter().zip(pred).map(|(&a, &b)| half * (a - b) * (a - b)).sum() };
    // the grower draws no random numbers when every feature is scanned
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut pred = vec![base; d.n()];
    let mut penalty = T::zero();
    let mut trace = vec![loss(&pred)];
    let mut trees = Vec::new();
    for _ in 0..params.rounds {
        let resid: Vec<T> = y.iter().zip(&pred).map(|(&a, &b)| a - b).collect();
        let mut tree = grow(d, &resid, (0..d.n()).collect(), &grow_params, &mut rng);
        tree.scale_leaves(eta);
        let omega = gamma * T::from_usize_lossy(tree.n_leaves())
            + half * lambda * tree.leaf_values().map(|w| w * w).sum::<T>();
        let next: Vec<T> = d.rows().zip(&pred).map(|(r, &p)| p + tree.predict_row(r)).collect();
        let obj = loss(&next) + penalty + omega;
        if obj > *trace.last().expect("non-empty trace") {
            log::debug!("boost: stopping after {} trees, next tree raises the objective", trees.len());
            break;
        }
        pred = next;
        penalty += omega;
        trace.push(obj);
        trees.push(tree);
    }
    Ok(BoostedModel {
        trees,
        base_score: base,
        eta,
        gamma_leaf: gamma,
        lambda_leaf: lambda,
        rounds: params.rounds,
        n_features: d.p(),
        objective_trace: trace,
    })
}

impl<T: Scalar> BoostedModel<T> {
    pub fn predict_row(&self, x: &[T]) -> T {
        self.base_score + self.trees.iter().map(|t| t.predict_row(x)).sum::<T>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn leaf_weight_with_l2_penalty() {
        let d = DesignMatrix::unnamed(&[vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let p = BoostParams { rounds: 1, eta: 1.0, base_score: Some(0.0), ..Default::default() };
        let m = boost_fit(&d, &p).unwrap();
        let leaves: Vec<f64> = m.trees[0].leaf_values().collect();
        assert_eq!(leaves.len(), 1);
        assert!((leaves[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn huge_gamma_keeps_base_score() {
        let d = DesignMatrix::unnamed(&[vec![0.0f64], vec![1.0], vec![2.0]], vec![1.0, 4.0, 2.0]).unwrap();
        let p = BoostParams { gamma_leaf: 1e6, ..Default::default() };
        let m = boost_fit(&d, &p).unwrap();
        assert!(m.trees.is_empty());
        assert!((m.predict_row(&[1.0]) - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_full_tree_memorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
        let y: Vec<f64> = (0..40).map(|_| rng.random_range(0.0..5.0)).collect();
        let d = DesignMatrix::unnamed(&rows, y).unwrap();
        let p = BoostParams { rounds: 1, eta: 1.0, lambda_leaf: 0.0, gamma_leaf: 0.0, max_depth: None, ..Default::default() };
        let m = boost_fit(&d, &p).unwrap();
        for i in 0..40 {
            assert!((m.predict_row(d.row(i)) - d.y()[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random(), rng.random(), rng.random()]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 5.0 * r[0] + (6.0 * r[1]).sin() + rng.random_range(-0.2..0.2)).collect();
        let d = DesignMatrix::unnamed(&rows, y).unwrap();
        // with no leaf penalty every shrunk tree lowers the objective, so no
        // round is cut short
        let p = BoostParams { rounds: 50, eta: 0.3, gamma_leaf: 0.0, max_depth: Some(3), ..Default::default() };
        let m = boost_fit(&d, &p).unwrap();
        assert_eq!(m.trees.len(), 50);
        assert!(m.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
