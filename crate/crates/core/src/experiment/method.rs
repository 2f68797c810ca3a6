use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::ecoc::{
    ecoc_train, min_code_length, random_code, Decoding, EcocModel, DEFAULT_CODE_LENGTH,
};
use crate::ensembles::{
    adaboost_train, bagging_train, BaggingModel, BoostModel, DEFAULT_ENSEMBLE_SIZE,
    DEFAULT_SUBSAMPLE_FRACTION,
};
use crate::error::{Error, Result};
use crate::features::{pca_fit, pca_transform, PcaModel};
use crate::learners::{
    Classifier, Learner, LearnerConfig, MulticlassModel, SvmSpec, DEFAULT_KNN_K,
    DEFAULT_MLP_EPOCHS, DEFAULT_MLP_HIDDEN, DEFAULT_MLP_LR, DEFAULT_TREE_DEPTH,
};
use crate::seed;

fn default_knn_k() -> usize {
    DEFAULT_KNN_K
}
fn default_tree_depth() -> usize {
    DEFAULT_TREE_DEPTH
}
fn one() -> usize {
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
fn default_members() -> usize {
    DEFAULT_ENSEMBLE_SIZE
}
fn default_fraction() -> f64 {
    DEFAULT_SUBSAMPLE_FRACTION
}
fn default_code_length() -> usize {
    DEFAULT_CODE_LENGTH
}

/// One column of the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodConfig {
    /// One-vs-all SVM.
    Svm(SvmSpec),
    Dt {
        #[serde(default = "default_tree_depth")]
        max_depth: usize,
        #[serde(default = "one")]
        min_leaf: usize,
    },
    Knn {
        #[serde(default = "default_knn_k")]
        k: usize,
    },
    Nn {
        #[serde(default = "default_hidden")]
        hidden: usize,
        #[serde(default = "default_lr")]
        lr: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
    },
    Bagging {
        #[serde(default = "default_members")]
        members: usize,
        #[serde(default)]
        base: LearnerConfig,
    },
    Boosting {
        #[serde(default = "default_members")]
        rounds: usize,
        #[serde(default = "default_fraction")]
        subsample_fraction: f64,
        #[serde(default)]
        base: LearnerConfig,
    },
    Ecoc {
        #[serde(default = "default_code_length")]
        code_length: usize,
        #[serde(default)]
        pic: LearnerConfig,
        #[serde(default)]
        decoding: Decoding,
    },
}

impl MethodConfig {
    pub fn svm() -> Self {
        MethodConfig::Svm(SvmSpec::default())
    }

    pub fn dt() -> Self {
        MethodConfig::Dt {
            max_depth: DEFAULT_TREE_DEPTH,
            min_leaf: 1,
        }
    }

    pub fn knn() -> Self {
        MethodConfig::Knn { k: DEFAULT_KNN_K }
    }

    pub fn nn() -> Self {
        MethodConfig::Nn {
            hidden: DEFAULT_MLP_HIDDEN,
            lr: DEFAULT_MLP_LR,
            epochs: DEFAULT_MLP_EPOCHS,
        }
    }

    pub fn bagging() -> Self {
        MethodConfig::Bagging {
            members: DEFAULT_ENSEMBLE_SIZE,
            base: LearnerConfig::default(),
        }
    }

    pub fn boosting() -> Self {
        MethodConfig::Boosting {
            rounds: DEFAULT_ENSEMBLE_SIZE,
            subsample_fraction: DEFAULT_SUBSAMPLE_FRACTION,
            base: LearnerConfig::default(),
        }
    }

    pub fn ecoc() -> Self {
        MethodConfig::Ecoc {
            code_length: DEFAULT_CODE_LENGTH,
            pic: LearnerConfig::default(),
            decoding: Decoding::Hard,
        }
    }

    /// Every method, in table order.
    pub fn full_suite() -> Vec<Self> {
        vec![
            Self::svm(),
            Self::dt(),
            Self::knn(),
            Self::nn(),
            Self::bagging(),
            Self::boosting(),
            Self::ecoc(),
        ]
    }

    /// Short key used in configs, seed derivation and report rows.
    pub fn label(&self) -> &'static str {
        match self {
            MethodConfig::Svm(_) => "svm",
            MethodConfig::Dt { .. } => "dt",
            MethodConfig::Knn { .. } => "knn",
            MethodConfig::Nn { .. } => "nn",
            MethodConfig::Bagging { .. } => "bagging",
            MethodConfig::Boosting { .. } => "boosting",
            MethodConfig::Ecoc { .. } => "ecoc",
        }
    }

    /// Column heading for tables.
    pub fn title(&self) -> &'static str {
        match self {
            MethodConfig::Svm(_) => "SVM",
            MethodConfig::Dt { .. } => "DT",
            MethodConfig::Knn { .. } => "KNN",
            MethodConfig::Nn { .. } => "NN",
            MethodConfig::Bagging { .. } => "Bagging",
            MethodConfig::Boosting { .. } => "Boosting",
            MethodConfig::Ecoc { .. } => "ECOC",
        }
    }

    /// The single-learner configuration, if this method is one.
    pub fn as_learner(&self) -> Option<LearnerConfig> {
        match *self {
            MethodConfig::Svm(spec) => Some(LearnerConfig::Svm(spec)),
            MethodConfig::Dt {
                max_depth,
                min_leaf,
            } => Some(LearnerConfig::Tree {
                max_depth,
                min_leaf,
            }),
            MethodConfig::Knn { k } => Some(LearnerConfig::Knn { k }),
            MethodConfig::Nn { hidden, lr, epochs } => {
                Some(LearnerConfig::Mlp { hidden, lr, epochs })
            }
            _ => None,
        }
    }

    /// Hyperparameter checks; `classes` enables the code-length bound.
    pub fn validate(&self, classes: Option<usize>) -> Result<()> {
        if let Some(learner) = self.as_learner() {
            return learner.validate();
        }
        match *self {
            MethodConfig::Bagging { members, base } => {
                if members == 0 {
                    return Err(Error::Range("bagging needs at least one member".into()));
                }
                base.validate()
            }
            MethodConfig::Boosting {
                rounds,
                subsample_fraction,
                base,
            } => {
                if rounds == 0 {
                    return Err(Error::Range("boosting needs at least one round".into()));
                }
                if !(subsample_fraction > 0.0 && subsample_fraction <= 1.0) {
                    return Err(Error::Range(format!(
                        "subsample fraction {subsample_fraction} not in (0, 1]"
                    )));
                }
                base.validate()
            }
            MethodConfig::Ecoc {
                code_length, pic, ..
            } => {
                if let Some(m) = classes {
                    let bound = min_code_length(m);
                    if code_length < bound {
                        return Err(Error::Range(format!(
                            "code length {code_length} below {bound} for {m} classes"
                        )));
                    }
                }
                pic.validate()
            }
            _ => Ok(()),
        }
    }

    /// Fits this method; randomness comes only from `seed`.
    pub fn train(&self, ds: &Dataset, seed: u64) -> Result<MethodModel> {
        if let Some(learner) = self.as_learner() {
            return Ok(MethodModel::Single(learner.fit(ds, seed)?));
        }
        Ok(match *self {
            MethodConfig::Bagging { members, base } => {
                MethodModel::Bagging(bagging_train(ds, members, &base, seed)?)
            }
            MethodConfig::Boosting {
                rounds,
                subsample_fraction,
                base,
            } => {
                MethodModel::Boosting(adaboost_train(ds, rounds, subsample_fraction, &base, seed)?)
            }
            MethodConfig::Ecoc {
                code_length,
                pic,
                decoding,
            } => {
                let code = random_code(ds.n_classes(), code_length, seed::derive(seed, "code"))?;
                MethodModel::Ecoc(ecoc_train(ds, &code, &pic, seed)?.with_decoding(decoding))
            }
            _ => unreachable!(),
        })
    }
}

/// A trained model of any method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum MethodModel {
    Single(MulticlassModel),
    Bagging(BaggingModel<MulticlassModel>),
    Boosting(BoostModel<MulticlassModel>),
    Ecoc(EcocModel),
}

impl Classifier for MethodModel {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            MethodModel::Single(m) => m.predict(x),
            MethodModel::Bagging(m) => m.predict(x),
            MethodModel::Boosting(m) => m.predict(x),
            MethodModel::Ecoc(m) => m.predict(x),
        }
    }

    fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        match self {
            MethodModel::Single(m) => m.predict_all(ds),
            MethodModel::Bagging(m) => m.predict_all(ds),
            MethodModel::Boosting(m) => m.predict_all(ds),
            MethodModel::Ecoc(m) => m.predict_all(ds),
        }
    }
}

/// Optional PCA projection followed by a trained method, applied to raw
/// feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub method: MethodConfig,
    pub pca: Option<PcaModel>,
    pub input_dim: usize,
    pub label_names: Vec<String>,
    pub model: MethodModel,
}

impl Pipeline {
    pub fn fit(
        ds: &Dataset,
        method: &MethodConfig,
        pca_k: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        method.validate(Some(ds.n_classes()))?;
        let (pca, projected) = match pca_k {
            Some(k) => {
                let p = pca_fit(ds, k)?;
                let t = pca_transform(&p, ds)?;
                (Some(p), t)
            }
            None => (None, ds.clone()),
        };
        let model = method.train(&projected, seed)?;
        Ok(Self {
            method: *method,
            pca,
            input_dim: ds.dim(),
            label_names: ds.label_names().to_vec(),
            model,
        })
    }

    pub fn project(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.dim() != self.input_dim {
            return Err(Error::shape(self.input_dim, ds.dim()));
        }
        match &self.pca {
            Some(p) => pca_transform(p, ds),
            None => Ok(ds.clone()),
        }
    }

    /// Predicted class indices for every row of `ds`.
    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        self.model.predict_all(&self.project(ds)?)
    }

    pub fn predict_rows(&self, features: Vec<f64>, dim: usize) -> Result<Vec<usize>> {
        if dim != self.input_dim {
            return Err(Error::shape(self.input_dim, dim));
        }
        let n = features.len() / dim.max(1);
        let ds = Dataset::from_flat(features, dim, vec![0; n], self.label_names.clone())?;
        self.predict_all(&ds)
    }
}

/// `m × m` counts, rows true class, columns predicted.
pub fn confusion_matrix(truth: &[usize], predicted: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut cm = vec![vec![0; classes]; classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        cm[t][p] += 1;
    }
    cm
}
