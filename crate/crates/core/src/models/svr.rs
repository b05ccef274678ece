//! ε-insensitive support vector regression.
//!
//! The dual is solved with sequential minimal optimization over the 2n
//! variables `(alpha, alpha*)`, using second-order working-set selection.
//! Features are standardized on the training rows; the response is used as
//! is. Arithmetic inside the solver is `f64` regardless of `T`.

use serde::{Deserialize, Serialize};

use super::{DesignMatrix, ModelError, Standardizer};
use crate::Scalar;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// `exp(-gamma |u - v|^2)` on standardized features; `None` uses
    /// `1 / (p * var(X))`.
    Rbf { gamma: Option<f64> },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Rbf { gamma: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: Kernel,
    /// Stopping threshold on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self { c: 10.0, epsilon: 0.1, kernel: Kernel::default(), tol: 1e-6, max_iter: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel<T> {
    /// `alpha_i - alpha*_i` for each support vector.
    pub dual_coef: Vec<T>,
    /// Standardized support vectors, one per entry of `dual_coef`.
    pub support_vectors: Vec<Vec<T>>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    pub b: T,
    pub c: T,
    pub epsilon: T,
    /// Kernel with `gamma` resolved.
    pub kernel: Kernel,
    pub standardization: Standardizer<T>,
    pub converged: bool,
    pub iterations: usize,
}

fn kernel_eval(k: Kernel, u: &[f64], v: &[f64]) -> f64 {
    match k {
        Kernel::Linear => u.iter().zip(v).map(|(a, b)| a * b).sum(),
        Kernel::Rbf { gamma } => {
            let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            (-gamma.expect("resolved gamma") * d2).exp()
        }
    }
}

/// Fits an ε-SVR. On hitting `max_iter` the current iterate is returned with
/// `converged = false` and a warning is logged.
pub fn svr_fit<T: Scalar>(d: &DesignMatrix<T>, params: &SvrParams) -> Result<SvrModel<T>, ModelError> {
    if !(params.c > 0.0) || !params.c.is_finite() {
        return Err(ModelError::InvalidParameter(format!("svr C must be > 0, got {}", params.c)));
    }
    if !(params.epsilon >= 0.0) || !params.epsilon.is_finite() {
        return Err(ModelError::InvalidParameter(format!("svr epsilon must be >= 0, got {}", params.epsilon)));
    }
    if !(params.tol > 0.0) {
        return Err(ModelError::InvalidParameter("svr tol must be > 0".into()));
    }
    let n = d.n();
    let p = d.p();
    let st = Standardizer::fit(d);
    let z: Vec<Vec<f64>> = d
        .rows()
        .map(|r| st.transform_row(r).into_iter().map(|v| v.to_f64_lossy()).collect())
        .collect();
    let y: Vec<f64> = d.y().iter().map(|v| v.to_f64_lossy()).collect();

    let kernel = match params.kernel {
        Kernel::Linear => Kernel::Linear,
        Kernel::Rbf { gamma: Some(g) } if g > 0.0 => Kernel::Rbf { gamma: Some(g) },
        Kernel::Rbf { gamma: Some(g) } => {
            return Err(ModelError::InvalidParameter(format!("rbf gamma must be > 0, got {g}")))
        }
        Kernel::Rbf { gamma: None } => {
            let all: Vec<f64> = z.iter().flatten().copied().collect();
            let var = crate::scalar::variance(&all).unwrap_or(0.0);
            let g = if var > 0.0 { 1.0 / (p as f64 * var) } else { 1.0 / p as f64 };
            Kernel::Rbf { gamma: Some(g) }
        }
    };

    let mut kmat = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel_eval(kernel, &z[i], &z[j]);
            kmat[i * n + j] = v;
            kmat[j * n + i] = v;
        }
    }

    let c = params.c;
    let m = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let q = |s: usize, t: usize| sign(s) * sign(t) * kmat[(s % n) * n + (t % n)];
    let mut alpha = vec![0.0; m];
    let mut grad: Vec<f64> = (0..m)
        .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        // first index: maximal violation
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..m {
            let yt = sign(t);
            if (yt > 0.0 && alpha[t] < c) || (yt < 0.0 && alpha[t] > 0.0) {
                let v = -yt * grad[t];
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // second index: largest objective decrease given the first
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        for t in 0..m {
            let yt = sign(t);
            if (yt > 0.0 && alpha[t] > 0.0) || (yt < 0.0 && alpha[t] < c) {
                let v = yt * grad[t];
                if v >= gmax2 {
                    gmax2 = v;
                }
                if let Some(i) = i_sel {
                    let grad_diff = gmax + v;
                    if grad_diff > 0.0 {
                        let mut quad = q(i, i) + q(t, t) - 2.0 * sign(i) * yt * q(i, t);
                        if quad <= 0.0 {
                            quad = TAU;
                        }
                        let obj = -grad_diff * grad_diff / quad;
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            }
        }
        if gmax + gmax2 < params.tol {
            converged = true;
            break;
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let quad = (q(i, i) + q(j, j) + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..m {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }
    if !converged {
        log::warn!("svr: no convergence after {} iterations", params.max_iter);
    }

    // bias: average over free variables, else midpoint of the feasible range
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..m {
        let yg = sign(t) * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if sign(t) < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if at_lower {
            if sign(t) > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let mut dual_coef = Vec::new();
    let mut support_vectors = Vec::new();
    let mut support_indices = Vec::new();
    for i in 0..n {
        let beta = alpha[i] - alpha[i + n];
        if beta != 0.0 {
            dual_coef.push(T::lit(beta));
            support_vectors.push(z[i].iter().map(|&v| T::lit(v)).collect());
            support_indices.push(i);
        }
    }
    Ok(SvrModel {
        dual_coef,
        support_vectors,
        support_indices,
        b: T::lit(-rho),
        c: T::lit(c),
        epsilon: T::lit(params.epsilon),
        kernel,
        standardization: st,
        converged,
        iterations,
    })
}

impl<T: Scalar> SvrModel<T> {
    pub fn predict_row(&self, x: &[T]) -> T {
        let z: Vec<f64> = self.standardization.transform_row(x).iter().map(|v| v.to_f64_lossy()).collect();
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, &a)| {
                let u: Vec<f64> = sv.iter().map(|v| v.to_f64_lossy()).collect();
                a.to_f64_lossy() * kernel_eval(self.kernel, &u, &z)
            })
            .sum();
        T::lit(s + self.b.to_f64_lossy())
    }

    /// Primal weights on the standardized features (linear kernel only).
    pub fn linear_weights(&self) -> Option<Vec<T>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let p = self.standardization.means.len();
        let mut w = vec![T::zero(); p];
        for (sv, &a) in self.support_vectors.iter().zip(&self.dual_coef) {
            for (wk, &v) in w.iter_mut().zip(sv) {
                *wk += a * v;
            }
        }
        Some(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear(c: f64, epsilon: f64) -> SvrParams {
        SvrParams { c, epsilon, kernel: Kernel::Linear, ..Default::default() }
    }

    #[test]
    fn flat_inside_tube() {
        let d = DesignMatrix::unnamed(&[vec![1.0f64], vec![2.0], vec![3.0], vec![4.0]], vec![5.0; 4]).unwrap();
        let m = svr_fit(&d, &linear(1.0, 1.0)).unwrap();
        assert!(m.support_indices.is_empty());
        assert!((m.b - 5.0).abs() < 1e-12);
        let w = m.linear_weights().unwrap();
        assert!(w.iter().all(|v| v.abs() < 1e-12));
        assert!(m.converged);
    }

    #[test]
    fn two_point_interpolation() {
        let d = DesignMatrix::unnamed(&[vec![0.0f64], vec![1.0]], vec![0.0, 2.0]).unwrap();
        let m = svr_fit(&d, &linear(1e6, 0.0)).unwrap();
        for x in [0.0, 0.5, 1.0, 3.0] {
            assert!((m.predict_row(&[x]) - 2.0 * x).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn parameter_checks() {
        let d = DesignMatrix::unnamed(&[vec![0.0], vec![1.0]], vec![0.0, 2.0]).unwrap();
        assert!(svr_fit(&d, &linear(1.0, -0.1)).is_err());
        assert!(svr_fit(&d, &linear(0.0, 0.1)).is_err());
    }

    #[test]
    fn box_constraint_and_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..5 {
            let n = 40;
            let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
            let y: Vec<f64> = rows.iter().map(|r| r[0].sin() * 3.0 + r[1] + rng.random_range(-0.3..0.3)).collect();
            let d = DesignMatrix::unnamed(&rows, y).unwrap();
            let params = SvrParams { c: 2.0, epsilon: 0.2, ..Default::default() };
            let m = svr_fit(&d, &params).unwrap();
            assert!(m.converged, "trial {trial}");
            let mut coef = vec![0.0; n];
            for (&i, &a) in m.support_indices.iter().zip(&m.dual_coef) {
                assert!(a.abs() <= params.c + 1e-12);
                coef[i] = a;
            }
            for i in 0..n {
                let r = d.y()[i] - m.predict_row(d.row(i));
                let a = coef[i];
                let tol = 1e-4;
                if a == 0.0 {
                    assert!(r.abs() <= params.epsilon + tol);
                } else if a.abs() < params.c {
                    assert!((r.abs() - params.epsilon).abs() <= tol && r * a > 0.0);
                } else {
                    assert!(r * a.signum() >= params.epsilon - tol);
                }
            }
        }
    }

    #[test]
    fn runs_in_f32() {
        let d = DesignMatrix::<f32>::unnamed(&[vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 1.0, 2.0]).unwrap();
        let m = svr_fit(&d, &linear(100.0, 0.01)).unwrap();
        assert!((m.predict_row(&[1.5]) - 1.5).abs() < 0.05);
    }
}
