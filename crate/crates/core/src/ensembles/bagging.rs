use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bootstrap_sample, weighted_vote};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{Classifier, Learner};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel<M> {
    pub members: Vec<M>,
    pub n_classes: usize,
    pub dim: usize,
    /// Members whose bootstrap replicate lacked a class and were trained on
    /// the full set instead.
    #[serde(default)]
    pub fallback_members: Vec<usize>,
}

impl<M> BaggingModel<M> {
    pub fn k_count(&self) -> usize {
        self.members.len()
    }
}

/// Member `k` is fit on `bootstrap_sample(ds, seed ^ k)` with the same seed.
pub fn bagging_train<L: Learner>(
    ds: &Dataset,
    k_count: usize,
    base: &L,
    seed: u64,
) -> Result<BaggingModel<L::Model>>
where
    L::Model: Send,
{
    if k_count == 0 {
        return Err(Error::Range("bagging needs at least one member".into()));
    }
    if ds.is_empty() {
        return Err(Error::EmptyInput("bagging training set is empty".into()));
    }
    let present = ds.class_counts().iter().filter(|&&c| c > 0).count();
    let trained: Vec<(L::Model, bool)> = (0..k_count)
        .into_par_iter()
        .map(|k| {
            let member_seed = seed ^ k as u64;
            let replicate = bootstrap_sample(ds, member_seed)?;
            let covered = replicate.class_counts().iter().filter(|&&c| c > 0).count();
            if covered < present {
                log::warn!(
                    "bagging member {k}: bootstrap missed a class, training on the full set"
                );
                Ok((base.fit(ds, member_seed)?, true))
            } else {
                Ok((base.fit(&replicate, member_seed)?, false))
            }
        })
        .collect::<Result<_>>()?;
    let fallback_members = trained
        .iter()
        .enumerate()
        .filter(|(_, (_, fell_back))| *fell_back)
        .map(|(k, _)| k)
        .collect();
    Ok(BaggingModel {
        members: trained.into_iter().map(|(m, _)| m).collect(),
        n_classes: ds.n_classes(),
        dim: ds.dim(),
        fallback_members,
    })
}

/// Unweighted plurality vote; ties go to the lowest class index.
pub fn bagging_predict<M: Classifier>(model: &BaggingModel<M>, x: &[f64]) -> Result<usize> {
    if x.len() != model.dim {
        return Err(Error::shape(model.dim, x.len()));
    }
    let votes = model
        .members
        .iter()
        .map(|m| m.predict(x).map(|c| (c, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_vote(votes.into_iter(), model.n_classes))
}

impl<M: Classifier> Classifier for BaggingModel<M> {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        bagging_predict(self, x)
    }
}
