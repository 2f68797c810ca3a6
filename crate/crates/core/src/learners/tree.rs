//! Binary decision tree grown greedily on information gain.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class: usize,
        probabilities: Vec<f64>,
    },
}

impl TreeNode {
    fn leaf(counts: &[usize]) -> TreeNode {
        let total: usize = counts.iter().sum();
        let probabilities = counts.iter().map(|&c| c as f64 / total as f64).collect();
        TreeNode::Leaf {
            class: super::knn::argmax_count(counts),
            probabilities,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// The leaf reached by `x` (`x[feature] ≤ threshold` goes left).
    pub fn leaf_for(&self, x: &[f64]) -> (usize, &[f64]) {
        let mut node = self;
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
                TreeNode::Leaf {
                    class,
                    probabilities,
                } => return (*class, probabilities),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub dim: usize,
    pub n_classes: usize,
}

impl TreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        tree_predict(self, x)
    }

    /// Leaf probability of class 1.
    pub fn positive_probability(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.root.leaf_for(x).1.get(1).copied().unwrap_or(0.0))
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::shape(self.dim, x.len()));
        }
        Ok(())
    }
}

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("entropy of all-zero counts".into()));
    }
    Ok(entropy_unchecked(counts, total))
}

fn entropy_unchecked(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            p * p.log2()
        })
        .sum::<f64>()
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Grower<'a> {
    ds: &'a Dataset,
    max_depth: usize,
    min_leaf: usize,
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.ds.n_classes()];
        for &i in idx {
            c[self.ds.label(i)] += 1;
        }
        c
    }

    /// Best threshold over all features; earliest feature and threshold win ties.
    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<Candidate> {
        let n = idx.len();
        let parent_entropy = entropy_unchecked(parent, n);
        let mut best: Option<Candidate> = None;
        let mut order = idx.to_vec();
        for feature in 0..self.ds.dim() {
            let value = |i: usize| self.ds.row(i)[feature];
            order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
            let mut left = vec![0usize; parent.len()];
            for pos in 1..n {
                left[self.ds.label(order[pos - 1])] += 1;
                let (lo, hi) = (value(order[pos - 1]), value(order[pos]));
                if lo == hi || pos < self.min_leaf || n - pos < self.min_leaf {
                    continue;
                }
                let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                let gain = parent_entropy
                    - (pos as f64 / n as f64) * entropy_unchecked(&left, pos)
                    - ((n - pos) as f64 / n as f64) * entropy_unchecked(&right, n - pos);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let threshold = lo + (hi - lo) / 2.0;
                    best = Some(Candidate {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn grow(&self, idx: &[usize], depth: usize) -> TreeNode {
        let counts = self.counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth {
            return TreeNode::leaf(&counts);
        }
        let Some(split) = self.best_split(idx, &counts) else {
            return TreeNode::leaf(&counts);
        };
        // Zero-gain splits are still taken (XOR at the root has none better).
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.ds.row(i)[split.feature] <= split.threshold);
        if left.is_empty() || right.is_empty() {
            return TreeNode::leaf(&counts);
        }
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(&left, depth + 1)),
            right: Box::new(self.grow(&right, depth + 1)),
        }
    }
}

/// Grows a tree: candidate thresholds are midpoints between consecutive
/// distinct sorted feature values; growth stops at purity, `max_depth`, or
/// when no split leaves at least `min_leaf` samples on both sides.
pub fn tree_train(ds: &Dataset, max_depth: usize, min_leaf: usize) -> Result<TreeModel> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("tree training set is empty".into()));
    }
    if max_depth == 0 || min_leaf == 0 {
        return Err(Error::Range(
            "max_depth and min_leaf must be positive".into(),
        ));
    }
    let grower = Grower {
        ds,
        max_depth,
        min_leaf,
    };
    let idx: Vec<usize> = (0..ds.len()).collect();
    Ok(TreeModel {
        root: grower.grow(&idx, 0),
        dim: ds.dim(),
        n_classes: ds.n_classes(),
    })
}

pub fn tree_predict(model: &TreeModel, x: &[f64]) -> Result<usize> {
    model.check(x)?;
    Ok(model.root.leaf_for(x).0)
}
