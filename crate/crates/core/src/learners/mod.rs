//! Base classifiers and the traits the ensembles are generic over.

pub mod bank;
pub mod kernel;
pub mod knn;
pub mod mlp;
pub mod ova;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub use bank::SupportBank;
pub use kernel::{kernel_eval, Gram, KernelConfig};
pub use knn::{knn_predict, KnnModel};
pub use mlp::{mlp_predict, mlp_train, MlpModel};
pub use ova::{one_vs_all_predict, one_vs_all_train, OneVsAll};
pub use svm::{svm_decision, svm_train, BinaryLabeled, SvmParams, TrainedSvm};
pub use tree::{entropy, tree_predict, tree_train, TreeModel, TreeNode};

/// A trained multiclass predictor.
pub trait Classifier: Send + Sync {
    fn predict(&self, x: &[f64]) -> Result<usize>;

    fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        ds.rows().map(|x| self.predict(x)).collect()
    }

    /// Fraction of rows predicted correctly.
    fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        if ds.is_empty() {
            return Err(Error::EmptyInput("accuracy of an empty dataset".into()));
        }
        let predicted = self.predict_all(ds)?;
        let correct = predicted
            .iter()
            .zip(ds.labels())
            .filter(|(p, l)| p == l)
            .count();
        Ok(correct as f64 / ds.len() as f64)
    }
}

/// Something that can fit a [`Classifier`] to a dataset from a seed.
pub trait Learner: Sync {
    type Model: Classifier;

    fn fit(&self, ds: &Dataset, seed: u64) -> Result<Self::Model>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    #[default]
    Rbf,
}

/// SVM hyperparameters before the feature dimension is known.
/// `gamma: None` resolves to `1/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSpec {
    pub c: f64,
    pub kernel: KernelKind,
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmSpec {
    fn default() -> Self {
        Self {
            c: 10.0,
            kernel: KernelKind::Rbf,
            gamma: None,
            tol: 1e-3,
            max_passes: 10,
        }
    }
}

impl SvmSpec {
    pub fn params(&self, dim: usize, seed: u64) -> SvmParams {
        let kernel = match self.kernel {
            KernelKind::Linear => KernelConfig::Linear,
            KernelKind::Rbf => KernelConfig::Rbf {
                gamma: self.gamma.unwrap_or(1.0 / dim.max(1) as f64),
            },
        };
        SvmParams {
            kernel,
            c: self.c,
            tol: self.tol,
            max_passes: self.max_passes,
            seed,
        }
    }
}

pub const DEFAULT_KNN_K: usize = 3;
pub const DEFAULT_TREE_DEPTH: usize = 20;
pub const DEFAULT_MLP_HIDDEN: usize = 32;
pub const DEFAULT_MLP_LR: f64 = 0.002;
pub const DEFAULT_MLP_EPOCHS: usize = 300;

fn default_knn_k() -> usize {
    DEFAULT_KNN_K
}
fn default_tree_depth() -> usize {
    DEFAULT_TREE_DEPTH
}
fn default_min_leaf() -> usize {
    1
}
fn default_hidden() -> usize {
    DEFAULT_MLP_HIDDEN
}
fn default_lr() -> f64 {
    DEFAULT_MLP_LR
}
fn default_epochs() -> usize {
    DEFAULT_MLP_EPOCHS
}

/// Which base learner to fit, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LearnerConfig {
    /// One-vs-all SVM when multiclass; a single machine for binary problems.
    Svm(SvmSpec),
    Knn {
        #[serde(default = "default_knn_k")]
        k: usize,
    },
    Tree {
        #[serde(default = "default_tree_depth")]
        max_depth: usize,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
    Mlp {
        #[serde(default = "default_hidden")]
        hidden: usize,
        #[serde(default = "default_lr")]
        lr: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
    },
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig::Svm(SvmSpec::default())
    }
}

impl LearnerConfig {
    pub fn knn() -> Self {
        LearnerConfig::Knn { k: DEFAULT_KNN_K }
    }

    pub fn tree() -> Self {
        LearnerConfig::Tree {
            max_depth: DEFAULT_TREE_DEPTH,
            min_leaf: 1,
        }
    }

    pub fn mlp() -> Self {
        LearnerConfig::Mlp {
            hidden: DEFAULT_MLP_HIDDEN,
            lr: DEFAULT_MLP_LR,
            epochs: DEFAULT_MLP_EPOCHS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Svm(_) => "svm",
            LearnerConfig::Knn { .. } => "knn",
            LearnerConfig::Tree { .. } => "tree",
            LearnerConfig::Mlp { .. } => "mlp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LearnerConfig::Svm(spec) => spec.params(1, 0).validate(),
            LearnerConfig::Knn { k: 0 } => Err(Error::Range("knn k must be >= 1".into())),
            LearnerConfig::Tree {
                max_depth,
                min_leaf,
            } if max_depth == 0 || min_leaf == 0 => Err(Error::Range(
                "tree max_depth and min_leaf must be >= 1".into(),
            )),
            LearnerConfig::Mlp { hidden, lr, .. } if hidden == 0 || !(lr > 0.0) => {
                Err(Error::Range("mlp hidden must be >= 1 and lr > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Any trained multiclass base model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum MulticlassModel {
    Svm(OneVsAll),
    Knn(KnnModel),
    Tree(TreeModel),
    Mlp(MlpModel),
}

impl Classifier for MulticlassModel {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            MulticlassModel::Svm(m) => m.predict(x),
            MulticlassModel::Knn(m) => m.predict(x),
            MulticlassModel::Tree(m) => m.predict(x),
            MulticlassModel::Mlp(m) => m.predict(x),
        }
    }

    fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        match self {
            MulticlassModel::Svm(m) => m.predict_all(ds),
            _ => ds.rows().map(|x| self.predict(x)).collect(),
        }
    }
}

impl Learner for LearnerConfig {
    type Model = MulticlassModel;

    fn fit(&self, ds: &Dataset, seed: u64) -> Result<MulticlassModel> {
        self.validate()?;
        Ok(match *self {
            LearnerConfig::Svm(spec) => {
                MulticlassModel::Svm(one_vs_all_train(ds, &spec.params(ds.dim(), seed))?)
            }
            LearnerConfig::Knn { k } => MulticlassModel::Knn(KnnModel::fit(ds, k)?),
            LearnerConfig::Tree {
                max_depth,
                min_leaf,
            } => MulticlassModel::Tree(tree_train(ds, max_depth, min_leaf)?),
            LearnerConfig::Mlp { hidden, lr, epochs } => {
                MulticlassModel::Mlp(mlp_train(ds, hidden, lr, epochs, seed)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_shapes() {
        let cfg: LearnerConfig = serde_json::from_str(r#"{"kind":"svm","c":5.0}"#).unwrap();
        assert_eq!(
            cfg,
            LearnerConfig::Svm(SvmSpec {
                c: 5.0,
                ..SvmSpec::default()
            })
        );
        let knn: LearnerConfig = serde_json::from_str(r#"{"kind":"knn"}"#).unwrap();
        assert_eq!(knn, LearnerConfig::knn());
        let back: LearnerConfig =
            serde_json::from_str(&serde_json::to_string(&LearnerConfig::mlp()).unwrap()).unwrap();
        assert_eq!(back, LearnerConfig::mlp());
    }

    #[test]
    fn default_gamma_is_inverse_dimension() {
        let p = SvmSpec::default().params(20, 3);
        assert_eq!(p.kernel, KernelConfig::Rbf { gamma: 0.05 });
        assert_eq!((p.c, p.seed), (10.0, 3));
    }

    #[test]
    fn every_learner_fits_a_toy_problem() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i / 4) as f64 * 5.0, (i % 4) as f64 * 0.1])
            .collect();
        let labels = (0..12).map(|i| i / 4).collect();
        let ds = Dataset::with_numeric_names(&rows, labels).unwrap();
        for cfg in [
            LearnerConfig::default(),
            LearnerConfig::knn(),
            LearnerConfig::tree(),
            LearnerConfig::Mlp {
                hidden: 8,
                lr: 0.2,
                epochs: 2000,
            },
        ] {
            let model = cfg.fit(&ds, 5).unwrap();
            assert_eq!(model.accuracy(&ds).unwrap(), 1.0, "{}", cfg.name());
        }
    }
}
