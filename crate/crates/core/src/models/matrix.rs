use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::Scalar;

/// Dense row-major feature matrix with its response vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix<T> {
    x: Vec<T>,
    y: Vec<T>,
    n: usize,
    p: usize,
    names: Vec<String>,
}

impl<T: Scalar> DesignMatrix<T> {
    /// Builds from row vectors. Every row must have `names.len()` entries and
    /// every value must be finite.
    pub fn from_rows(rows: &[Vec<T>], y: Vec<T>, names: Vec<String>) -> Result<Self, ModelError> {
        let p = names.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(ModelError::InvalidInput("row length differs from column count".into()));
        }
        let x = rows.iter().flatten().copied().collect();
        Self::from_flat(x, y, names)
    }

    pub fn from_flat(x: Vec<T>, y: Vec<T>, names: Vec<String>) -> Result<Self, ModelError> {
        let p = names.len();
        let n = y.len();
        if n == 0 || p == 0 {
            return Err(ModelError::InvalidInput(format!("need n >= 1 and p >= 1, got n={n}, p={p}")));
        }
        if x.len() != n * p {
            return Err(ModelError::InvalidInput(format!("{} values for a {n}x{p} matrix", x.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidInput("non-finite value in design matrix".into()));
        }
        Ok(Self { x, y, n, p, names })
    }

    /// Unnamed columns `x0, x1, ...`.
    pub fn unnamed(rows: &[Vec<T>], y: Vec<T>) -> Result<Self, ModelError> {
        let p = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, y, (0..p).map(|j| format!("x{j}")).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.x[i * self.p + j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.x.chunks_exact(self.p)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Result<Self, ModelError> {
        let mut x = Vec::with_capacity(idx.len() * self.p);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self::from_flat(x, y, self.names.clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, ModelError> {
        let x = self
            .rows()
            .flat_map(|r| cols.iter().map(move |&j| r[j]))
            .collect();
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        Self::from_flat(x, self.y.clone(), names)
    }

    pub fn with_y(&self, y: Vec<T>) -> Result<Self, ModelError> {
        Self::from_flat(self.x.clone(), y, self.names.clone())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn check_width(&self, p: usize) -> Result<(), ModelError> {
        if self.p != p {
            return Err(ModelError::DimensionMismatch { expected: p, got: self.p });
        }
        Ok(())
    }
}

/// Per-column centering and scaling learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub means: Vec<T>,
    /// Population standard deviation; 1 for constant columns.
    pub scales: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(d: &DesignMatrix<T>) -> Self {
        let nf = T::from_usize_lossy(d.n());
        let mut means = vec![T::zero(); d.p()];
        for r in d.rows() {
            for (m, &v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= nf);
        let mut vars = vec![T::zero(); d.p()];
        for r in d.rows() {
            for ((s, &v), &m) in vars.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let scales = vars
            .into_iter()
            .map(|s| {
                let sd = (s / nf).sqrt();
                if sd > T::epsilon() * (T::one() + sd) { sd } else { T::one() }
            })
            .collect();
        Self { means, scales }
    }

    pub fn transform_row(&self, row: &[T]) -> Vec<T> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }
}

/// Solves `A x = b` for square `A` (row-major, `k x k`) by Gaussian
/// elimination with partial pivoting. Pivots below `rel_tol * max|diag(A)|`
/// are treated as singular.
pub(crate) fn solve_linear<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, rel_tol: T) -> Result<Vec<T>, ModelError> {
    let k = b.len();
    assert_eq!(a.len(), k * k);
    let scale = (0..k).map(|i| a[i * k + i].abs()).fold(T::zero(), T::max);
    let tiny = if scale > T::zero() { rel_tol * scale } else { T::min_positive_value() };
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&r1, &r2| {
                a[r1 * k + col]
                    .abs()
                    .partial_cmp(&a[r2 * k + col].abs())
                    .expect("finite entries")
            })
            .expect("non-empty range");
        if a[piv * k + col].abs() <= tiny {
            return Err(ModelError::SingularSystem);
        }
        if piv != col {
            for j in 0..k {
                a.swap(piv * k + j, col * k + j);
            }
            b.swap(piv, col);
        }
        let d = a[col * k + col];
        for r in col + 1..k {
            let f = a[r * k + col] / d;
            if f == T::zero() {
                continue;
            }
            for j in col..k {
                let v = a[col * k + j];
                a[r * k + j] -= f * v;
            }
            let bc = b[col];
            b[r] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); k];
    for r in (0..k).rev() {
        let mut s = b[r];
        for j in r + 1..k {
            s -= a[r * k + j] * x[j];
        }
        x[r] = s / a[r * k + r];
    }
    Ok(x)
}
