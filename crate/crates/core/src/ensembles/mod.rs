//! Bagging, resampling AdaBoost.M1, and the majority-vote error probability.

mod bagging;
mod boost;

pub use bagging::{bagging_predict, bagging_train, BaggingModel};
pub use boost::{
    adaboost_predict, adaboost_train, adaboost_train_traced, member_weight, update_weights,
    BoostModel, BoostStop, DEFAULT_SUBSAMPLE_FRACTION, MAX_CONSECUTIVE_FAILURES,
};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::binomial_range;

pub const DEFAULT_ENSEMBLE_SIZE: usize = 11;

/// Probability that a strict majority of `n` independent members, each
/// wrong with probability `p`, is wrong: `Σ_{k=⌈n/2⌉}^{n} C(n,k) p^k (1−p)^(n−k)`.
pub fn majority_error_prob(n: usize, p: f64) -> Result<f64> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(Error::Range(format!(
            "member count must be odd and positive, got {n}"
        )));
    }
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Range(format!("member error {p} not in [0, 0.5)")));
    }
    Ok(binomial_range(n as u64, n.div_ceil(2) as u64, n as u64, p))
}

/// Distribution over training samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWeights {
    weights: Vec<f64>,
}

impl SampleWeights {
    pub fn uniform(l: usize) -> Self {
        Self {
            weights: vec![1.0 / l as f64; l],
        }
    }

    /// Normalizes nonnegative finite weights to sum to one.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("sample weights".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Range(
                "sample weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Range("sample weights sum to zero".into()));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `count` indices drawn with replacement by inverse CDF over `w`.
pub fn weighted_indices(w: &SampleWeights, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::Range("sample count must be >= 1".into()));
    }
    let mut cumulative = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for &p in w.as_slice() {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let last_positive = w.as_slice().iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = seed::rng(seed);
    Ok((0..count)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cumulative.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect())
}

pub fn weighted_sample(
    ds: &Dataset,
    w: &SampleWeights,
    count: usize,
    seed: u64,
) -> Result<Dataset> {
    if ds.is_empty() {
        return Err(Error::EmptyInput(
            "cannot sample from an empty dataset".into(),
        ));
    }
    if w.len() != ds.len() {
        return Err(Error::shape(ds.len(), w.len()));
    }
    if count > ds.len() {
        return Err(Error::Range(format!(
            "sample count {count} exceeds dataset size {}",
            ds.len()
        )));
    }
    Ok(ds.subset(&weighted_indices(w, count, seed)?))
}

/// `l` rows drawn uniformly with replacement.
pub fn bootstrap_sample(ds: &Dataset, seed: u64) -> Result<Dataset> {
    if ds.is_empty() {
        return Err(Error::EmptyInput(
            "cannot bootstrap an empty dataset".into(),
        ));
    }
    weighted_sample(ds, &SampleWeights::uniform(ds.len()), ds.len(), seed)
}

/// Plurality vote with per-member weights; ties go to the lowest class.
fn weighted_vote(votes: impl Iterator<Item = (usize, f64)>, n_classes: usize) -> usize {
    let mut tally = vec![0.0; n_classes];
    for (class, weight) in votes {
        tally[class] += weight;
    }
    let mut best = 0;
    for (c, &t) in tally.iter().enumerate() {
        if t > tally[best] {
            best = c;
        }
    }
    best
}
