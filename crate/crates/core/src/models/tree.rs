//! Regression trees shared by the forest and the boosted ensemble.
//!
//! Both learners grow trees greedily on a per-row target `t_i` with the
//! node score `S = (sum t)^2 / (count + lambda)`. A split's gain is
//! `S_left + S_right - S_parent`. With `lambda = 0` and `t = y` this is the
//! reduction in sum of squared errors (variance impurity); with `t` set to
//! the current residuals it is twice the second-order boosting gain for
//! squared loss. Leaf values are `sum t / (count + lambda)`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DesignMatrix;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node<T> {
    Leaf {
        value: T,
        n_samples: usize,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: T,
        left: usize,
        right: usize,
        n_samples: usize,
        /// Score gain of the split; the SSE decrease for variance trees.
        gain: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel<T> {
    pub nodes: Vec<Node<T>>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub n_features: usize,
}

impl<T: Scalar> TreeModel<T> {
    pub fn predict_row(&self, x: &[T]) -> T {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf { value, .. } => return *value,
                Node::Split { feature, threshold, left, right, .. } => {
                    k = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn leaf_values(&self) -> impl Iterator<Item = T> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, .. } => Some(*value),
            _ => None,
        })
    }

    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[Node<T>], k: usize) -> usize {
            match &nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Per-feature sum of split gains divided by the root sample count.
    pub fn impurity_decrease(&self) -> Vec<T> {
        let mut imp = vec![T::zero(); self.n_features];
        let root_n = match self.nodes.first() {
            Some(Node::Leaf { n_samples, .. } | Node::Split { n_samples, .. }) => *n_samples,
            None => return imp,
        };
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                imp[*feature] += *gain;
            }
        }
        let n = T::from_usize_lossy(root_n.max(1));
        imp.iter_mut().for_each(|v| *v /= n);
        imp
    }

    /// Multiplies every leaf value by `s`.
    pub(crate) fn scale_leaves(&mut self, s: T) {
        for node in &mut self.nodes {
            if let Node::Leaf { value, .. } = node {
                *value *= s;
            }
        }
    }
}

/// Best split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate<T> {
    pub feature: usize,
    pub threshold: T,
    pub gain: T,
}

/// Exact greedy search over `features` (scanned in the given order, then by
/// ascending threshold); the first candidate with the strictly largest gain
/// wins. Thresholds are midpoints between consecutive distinct values.
pub(crate) fn best_split_scored<T: Scalar>(
    x: &DesignMatrix<T>,
    target: &[T],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
    lambda: T,
) -> Option<SplitCandidate<T>> {
    let n = rows.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let score = |g: T, c: usize| g * g / (T::from_usize_lossy(c) + lambda);
    // centering keeps the variance gain well conditioned; it changes scores
    // only when lambda > 0
    let shift = if lambda == T::zero() {
        rows.iter().map(|&i| target[i]).sum::<T>() / T::from_usize_lossy(n)
    } else {
        T::zero()
    };
    let total: T = rows.iter().map(|&i| target[i] - shift).sum();
    let parent = score(total, n);

    let mut best: Option<SplitCandidate<T>> = None;
    let mut order: Vec<(T, T)> = Vec::with_capacity(n);
    for &f in features {
        order.clear();
        order.extend(rows.iter().map(|&i| (x.get(i, f), target[i] - shift)));
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let mut left = T::zero();
        for k in 0..n - 1 {
            left += order[k].1;
            let nl = k + 1;
            if nl < min_leaf.max(1) || n - nl < min_leaf.max(1) {
                continue;
            }
            let (a, b) = (order[k].0, order[k + 1].0);
            if !(a < b) {
                continue;
            }
            let gain = score(left, nl) + score(total - left, n - nl) - parent;
            if best.is_none_or(|bs| gain > bs.gain) {
                let mut thr = (a + b) / T::lit(2.0);
                if !(thr >= a && thr < b) {
                    thr = a;
                }
                best = Some(SplitCandidate { feature: f, threshold: thr, gain });
            }
        }
    }
    best
}

/// Best variance-reduction split of `rows` over `features`; `gain` is the
/// decrease in sum of squared errors.
pub fn best_split<T: Scalar>(
    x: &DesignMatrix<T>,
    rows: &[usize],
    features: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitCandidate<T>> {
    best_split_scored(x, x.y(), rows, features, min_samples_leaf, T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SplitRule<T> {
    /// Split any node whose targets are not all equal (CART).
    Impure,
    /// Split only when half the gain exceeds `gamma` (boosting).
    GainAbove { gamma: T },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams<T> {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub lambda: T,
    pub rule: SplitRule<T>,
    /// Features sampled per split; `None` means all.
    pub features_per_split: Option<usize>,
}

/// Grows a tree on `rows` (duplicates allowed, e.g. a bootstrap sample).
pub(crate) fn grow<T: Scalar, R: Rng>(
    x: &DesignMatrix<T>,
    target: &[T],
    rows: Vec<usize>,
    params: &GrowParams<T>,
    rng: &mut R,
) -> TreeModel<T> {
    let p = x.p();
    let mut nodes: Vec<Node<T>> = Vec::new();
    // (node slot, rows, depth)
    let mut stack = vec![(0usize, rows, 0usize)];
    nodes.push(Node::Leaf { value: T::zero(), n_samples: 0 });

    while let Some((slot, rows, depth)) = stack.pop() {
        let n = rows.len();
        let sum: T = rows.iter().map(|&i| target[i]).sum();
        let value = sum / (T::from_usize_lossy(n) + params.lambda);
        let leaf = Node::Leaf { value, n_samples: n };

        let depth_ok = params.max_depth.is_none_or(|d| depth < d);
        let impure = rows.iter().any(|&i| target[i] != target[rows[0]]);
        if !depth_ok || n < 2 * params.min_samples_leaf.max(1) || !impure {
            nodes[slot] = leaf;
            continue;
        }

        let split = match params.features_per_split {
            Some(m) if m < p => {
                let mut picked: Vec<usize> = sample(rng, p, m).into_vec();
                picked.sort_unstable();
                best_split_scored(x, target, &rows, &picked, params.min_samples_leaf, params.lambda)
                    .or_else(|| {
                        // sampled features were all constant here; fall back to the rest
                        let rest: Vec<usize> = (0..p).filter(|f| !picked.contains(f)).collect();
                        best_split_scored(x, target, &rows, &rest, params.min_samples_leaf, params.lambda)
                    })
            }
            _ => {
                let all: Vec<usize> = (0..p).collect();
                best_split_scored(x, target, &rows, &all, params.min_samples_leaf, params.lambda)
            }
        };
        let accept = match (split, params.rule) {
            (None, _) => false,
            (Some(s), SplitRule::Impure) => s.gain >= T::zero(),
            (Some(s), SplitRule::GainAbove { gamma }) => s.gain / T::lit(2.0) - gamma > T::zero(),
        };
        if !accept {
            nodes[slot] = leaf;
            continue;
        }
        let s = split.expect("accepted split exists");
        let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| x.get(i, s.feature) <= s.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { value: T::zero(), n_samples: 0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { value: T::zero(), n_samples: 0 });
        nodes[slot] = Node::Split {
            feature: s.feature,
            threshold: s.threshold,
            left,
            right,
            n_samples: n,
            gain: s.gain,
        };
        // right pushed first so the left subtree is expanded first
        stack.push((right, r_rows, depth + 1));
        stack.push((left, l_rows, depth + 1));
    }
    TreeModel {
        nodes,
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        n_features: p,
    }
}
