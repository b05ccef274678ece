use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// Partition of `0..n` into `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold index of each row.
    pub assignment: Vec<usize>,
    pub seed: u64,
}

/// Shuffles `0..n` with a ChaCha8 generator seeded by `seed` and deals the
/// permutation into `k` contiguous blocks; the first `n % k` folds get one
/// extra row.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::BadK { k, n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &i in &perm[pos..pos + size] {
            assignment[i] = f;
        }
        pos += size;
    }
    Ok(FoldAssignment { k, assignment, seed })
}

impl FoldAssignment {
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Rows held out in fold `f`, ascending.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.assignment[i] == f).collect()
    }

    /// Rows used to train fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.assignment[i] != f).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignment {
            s[f] += 1;
        }
        s
    }
}
