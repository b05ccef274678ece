use serde::{Deserialize, Serialize};

use super::matrix::{solve_linear, DesignMatrix, Standardizer};
use super::ModelError;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RidgeParams {
    pub lambda: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

/// L2-penalized least squares on standardized features.
///
/// `beta` lives on the standardized scale (the scale the penalty acts on);
/// [`RidgeModel::raw_coefficients`] maps it back to input units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel<T> {
    pub beta: Vec<T>,
    /// Unpenalized; equals the training mean of y.
    pub intercept: T,
    pub lambda: T,
    pub standardization: Standardizer<T>,
}

/// Minimizes `||y - X b||^2 + lambda ||b||^2` exactly through the
/// regularized normal equations `(Z'Z + lambda I) b = Z'(y - mean(y))`.
pub fn ridge_fit<T: Scalar>(d: &DesignMatrix<T>, lambda: T) -> Result<RidgeModel<T>, ModelError> {
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(ModelError::InvalidParameter(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let p = d.p();
    let std = Standardizer::fit(d);
    let ymean = crate::scalar::mean(d.y()).expect("n >= 1");

    let mut gram = vec![T::zero(); p * p];
    let mut rhs = vec![T::zero(); p];
    for (row, &y) in d.rows().zip(d.y()) {
        let z = std.transform_row(row);
        let yc = y - ymean;
        for a in 0..p {
            rhs[a] += z[a] * yc;
            for b in a..p {
                gram[a * p + b] += z[a] * z[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[a * p + b] = gram[b * p + a];
        }
        gram[a * p + a] += lambda;
    }
    let tol = T::epsilon() * T::lit(64.0) * T::from_usize_lossy(p.max(1));
    let beta = solve_linear(gram, rhs, tol)?;
    Ok(RidgeModel { beta, intercept: ymean, lambda, standardization: std })
}

impl<T: Scalar> RidgeModel<T> {
    pub fn predict_row(&self, x: &[T]) -> T {
        let z = self.standardization.transform_row(x);
        self.intercept + z.iter().zip(&self.beta).map(|(&a, &b)| a * b).sum::<T>()
    }

    /// `(slopes, intercept)` in the units of the input features.
    pub fn raw_coefficients(&self) -> (Vec<T>, T) {
        let st = &self.standardization;
        let slopes: Vec<T> = self.beta.iter().zip(&st.scales).map(|(&b, &s)| b / s).collect();
        let shift: T = slopes.iter().zip(&st.means).map(|(&s, &m)| s * m).sum();
        (slopes, self.intercept - shift)
    }

    pub fn beta_norm(&self) -> T {
        self.beta.iter().map(|&b| b * b).sum::<T>().sqrt()
    }
}
