use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            stratified: true,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Range(format!(
                "train_fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

// Round half up.
fn train_count(fraction: f64, count: usize) -> usize {
    (fraction * count as f64 + 0.5).floor() as usize
}

/// Seeded train/test partition. Stratified splits take
/// `round(train_fraction × class_count)` rows of every class; both outputs
/// keep the input row order.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed);
    let mut in_train = vec![false; ds.len()];

    if spec.stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
        for (i, &l) in ds.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        for (class, mut idx) in by_class.into_iter().enumerate() {
            if idx.is_empty() {
                continue;
            }
            let name = ds.label_names()[class].clone();
            if idx.len() < 2 {
                return Err(Error::Stratification {
                    class: name,
                    reason: format!("{} sample(s), need at least 2", idx.len()),
                });
            }
            let n_train = train_count(spec.train_fraction, idx.len());
            if n_train == 0 || n_train == idx.len() {
                return Err(Error::Stratification {
                    class: name,
                    reason: format!(
                        "train_fraction {} leaves {} of {} samples in train",
                        spec.train_fraction,
                        n_train,
                        idx.len()
                    ),
                });
            }
            idx.shuffle(&mut rng);
            for &i in &idx[..n_train] {
                in_train[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        let n_train = train_count(spec.train_fraction, idx.len());
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::Range(format!(
                "train_fraction {} leaves {n_train} of {} samples in train",
                spec.train_fraction,
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }

    let (train, test): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| in_train[i]);
    Ok((ds.subset(&train), ds.subset(&test)))
}
