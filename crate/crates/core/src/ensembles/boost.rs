use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{weighted_sample, weighted_vote, SampleWeights};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{Classifier, Learner};
use crate::seed;

pub const DEFAULT_SUBSAMPLE_FRACTION: f64 = 0.75;
pub const MAX_CONSECUTIVE_FAILURES: usize = 5;
const MIN_ERROR: f64 = 1e-10;

/// Why boosting stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostStop {
    Completed,
    /// A member classified the whole training set correctly.
    Perfect,
    /// Too many consecutive rounds had weighted error ≥ 0.5.
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel<M> {
    pub members: Vec<M>,
    pub member_weights: Vec<f64>,
    /// Weighted training error of each accepted member.
    pub round_errors: Vec<f64>,
    pub n_classes: usize,
    pub dim: usize,
    pub stop: BoostStop,
}

/// `½ ln((1−ε)/ε)` with `ε` clamped below at 1e-10.
pub fn member_weight(error: f64) -> f64 {
    let e = error.max(MIN_ERROR);
    0.5 * ((1.0 - e) / e).ln()
}

/// Scales misclassified weights by `e^α`, the rest by `e^−α`, and renormalizes.
pub fn update_weights(
    w: &SampleWeights,
    misclassified: &[bool],
    alpha: f64,
) -> Result<SampleWeights> {
    if misclassified.len() != w.len() {
        return Err(Error::shape(w.len(), misclassified.len()));
    }
    let up = alpha.exp();
    let down = (-alpha).exp();
    SampleWeights::new(
        w.as_slice()
            .iter()
            .zip(misclassified)
            .map(|(&p, &wrong)| p * if wrong { up } else { down })
            .collect(),
    )
}

pub fn adaboost_train<L: Learner>(
    ds: &Dataset,
    k_count: usize,
    subsample_fraction: f64,
    base: &L,
    seed: u64,
) -> Result<BoostModel<L::Model>> {
    adaboost_train_traced(ds, k_count, subsample_fraction, base, seed).map(|(m, _)| m)
}

/// AdaBoost.M1 with resampling. Also returns the sample weights in force
/// before each accepted round, plus the final weights.
pub fn adaboost_train_traced<L: Learner>(
    ds: &Dataset,
    k_count: usize,
    subsample_fraction: f64,
    base: &L,
    seed: u64,
) -> Result<(BoostModel<L::Model>, Vec<SampleWeights>)> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("boosting training set is empty".into()));
    }
    if k_count == 0 {
        return Err(Error::Range("boosting needs at least one round".into()));
    }
    if !(subsample_fraction > 0.0 && subsample_fraction <= 1.0) {
        return Err(Error::Range(format!(
            "subsample fraction {subsample_fraction} not in (0, 1]"
        )));
    }
    let l = ds.len();
    let sample_size = ((subsample_fraction * l as f64).round() as usize).clamp(1, l);

    let mut weights = SampleWeights::uniform(l);
    let mut trace = vec![weights.clone()];
    let mut members = Vec::new();
    let mut member_weights = Vec::new();
    let mut round_errors = Vec::new();
    let mut stop = BoostStop::Completed;
    let mut failures = 0;
    let mut last_failure = String::new();
    let mut attempt = 0u64;

    while members.len() < k_count {
        if failures >= MAX_CONSECUTIVE_FAILURES {
            stop = BoostStop::Aborted;
            break;
        }
        let round_seed = seed::derive_indexed(seed, "boost-round", attempt);
        attempt += 1;
        let sample = weighted_sample(ds, &weights, sample_size, round_seed)?;
        let model = match base.fit(&sample, round_seed) {
            Ok(m) => m,
            // The weighted sample lost a class the learner needs.
            Err(Error::Label(reason)) => {
                failures += 1;
                last_failure = reason;
                continue;
            }
            Err(e) => return Err(e),
        };
        let wrong: Vec<bool> = (0..l)
            .into_par_iter()
            .map(|i| model.predict(ds.row(i)).map(|p| p != ds.label(i)))
            .collect::<Result<_>>()?;
        let error: f64 = weights
            .as_slice()
            .iter()
            .zip(&wrong)
            .filter(|(_, &w)| w)
            .map(|(p, _)| p)
            .sum();
        if error >= 0.5 {
            failures += 1;
            last_failure = format!("weighted error {error:.4} >= 0.5");
            continue;
        }
        failures = 0;
        let alpha = member_weight(error);
        members.push(model);
        member_weights.push(alpha);
        round_errors.push(error);
        if error <= MIN_ERROR {
            stop = BoostStop::Perfect;
            break;
        }
        weights = update_weights(&weights, &wrong, alpha)?;
        trace.push(weights.clone());
    }

    if members.is_empty() {
        return Err(Error::BoostFailure {
            rounds_completed: 0,
            reason: last_failure,
        });
    }
    Ok((
        BoostModel {
            members,
            member_weights,
            round_errors,
            n_classes: ds.n_classes(),
            dim: ds.dim(),
            stop,
        },
        trace,
    ))
}

/// `argmax_c Σ_k α_k [member_k(x) = c]`, ties to the lowest class index.
pub fn adaboost_predict<M: Classifier>(model: &BoostModel<M>, x: &[f64]) -> Result<usize> {
    if x.len() != model.dim {
        return Err(Error::shape(model.dim, x.len()));
    }
    let votes = model
        .members
        .iter()
        .zip(&model.member_weights)
        .map(|(m, &a)| m.predict(x).map(|c| (c, a)))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_vote(votes.into_iter(), model.n_classes))
}

impl<M: Classifier> Classifier for BoostModel<M> {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        adaboost_predict(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerConfig;
    use rand::Rng as _;

    fn noisy_two_class(seed: u64) -> Dataset {
        let mut rng = seed::rng(seed);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let labels = rows
            .iter()
            .map(|r| usize::from(r[0] * r[0] + r[1] * r[1] > 0.5))
            .collect();
        Dataset::with_numeric_names(&rows, labels).unwrap()
    }

    fn stump() -> LearnerConfig {
        LearnerConfig::Tree {
            max_depth: 1,
            min_leaf: 1,
        }
    }

    #[derive(Debug)]
    struct Fixed(usize);

    impl Classifier for Fixed {
        fn predict(&self, _: &[f64]) -> Result<usize> {
            Ok(self.0)
        }
    }

    #[test]
    fn first_round_update_by_hand() {
        let w = SampleWeights::uniform(4);
        assert!(w.as_slice().iter().all(|&p| p == 0.25));
        let alpha = member_weight(0.25);
        assert!((alpha - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!((alpha - 0.549306).abs() < 1e-6);
        let next = update_weights(&w, &[true, false, false, false], alpha).unwrap();
        let z = 0.25 * 3f64.sqrt() + 3.0 * 0.25 / 3f64.sqrt();
        assert!((next.as_slice()[0] - 0.25 * 3f64.sqrt() / z).abs() < 1e-12);
        // The misclassified sample ends with half the mass.
        assert!((next.as_slice()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_member_is_clamped() {
        assert!((member_weight(0.0) - 0.5 * ((1.0 - 1e-10) / 1e-10f64).ln()).abs() < 1e-9);
        let ds = Dataset::with_numeric_names(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        let model = adaboost_train(&ds, 5, 1.0, &LearnerConfig::knn(), 0).unwrap();
        // Sampling with replacement may miss a point, so a perfect round
        // can come after a few imperfect ones.
        assert_eq!(model.stop, BoostStop::Perfect);
        assert_eq!(model.accuracy(&ds).unwrap(), 1.0);
    }

    #[test]
    fn single_round_model() {
        let ds = noisy_two_class(1);
        let model = adaboost_train(&ds, 1, 0.75, &stump(), 3).unwrap();
        assert_eq!((model.members.len(), model.member_weights.len()), (1, 1));
        for x in ds.rows() {
            assert_eq!(
                adaboost_predict(&model, x).unwrap(),
                model.members[0].predict(x).unwrap()
            );
        }
    }

    #[test]
    fn weighted_vote_examples() {
        let model = BoostModel {
            members: vec![Fixed(0), Fixed(1)],
            member_weights: vec![1.0, 0.5],
            round_errors: vec![0.1, 0.2],
            n_classes: 2,
            dim: 1,
            stop: BoostStop::Completed,
        };
        assert_eq!(adaboost_predict(&model, &[0.0]).unwrap(), 0);
        let tied = BoostModel {
            members: vec![Fixed(1), Fixed(0)],
            member_weights: vec![0.7, 0.7],
            ..model
        };
        assert_eq!(adaboost_predict(&tied, &[0.0]).unwrap(), 0);
        assert!(matches!(
            adaboost_predict(&tied, &[0.0, 1.0]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn weights_stay_normalized_and_training_error_drops() {
        let ds = noisy_two_class(4);
        let (model, trace) = adaboost_train_traced(&ds, 15, 0.75, &stump(), 8).unwrap();
        assert!(trace.iter().all(|w| (w.sum() - 1.0).abs() < 1e-9));
        assert!(model.round_errors.iter().all(|&e| e < 0.5));
        let first = 1.0 - model.members[0].accuracy(&ds).unwrap();
        let last = 1.0 - model.accuracy(&ds).unwrap();
        assert!(last <= first, "{last} > {first}");
    }

    #[test]
    fn all_rounds_failing_reports_boost_failure() {
        // A constant learner on a balanced problem has weighted error 0.5.
        struct Always;
        impl Learner for Always {
            type Model = Fixed;
            fn fit(&self, _: &Dataset, _: u64) -> Result<Fixed> {
                Ok(Fixed(0))
            }
        }
        let ds = Dataset::with_numeric_names(&[vec![0.0], vec![1.0]], vec![0, 1]).unwrap();
        match adaboost_train(&ds, 3, 1.0, &Always, 0) {
            Err(Error::BoostFailure {
                rounds_completed, ..
            }) => assert_eq!(rounds_completed, 0),
            other => panic!("expected boost failure, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let ds = noisy_two_class(6);
        let a = adaboost_train(&ds, 6, 0.75, &LearnerConfig::default(), 2).unwrap();
        let b = adaboost_train(&ds, 6, 0.75, &LearnerConfig::default(), 2).unwrap();
        assert_eq!(a, b);
        assert!(adaboost_train(&ds, 2, 0.0, &stump(), 0).is_err());
    }
}
