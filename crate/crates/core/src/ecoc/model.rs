use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{
    knn::KnnModel, mlp::mlp_train, svm::svm_train_with_gram, tree::tree_train, Classifier, Gram,
    LearnerConfig, MlpModel, SupportBank, TrainedSvm, TreeModel,
};

use super::code::{validate_code, CodingMatrix};

fn squash(f: f64) -> f64 {
    1.0 / (1.0 + (-f).exp())
}

/// Trained plug-in classifier for one coding-matrix column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum PicModel {
    Svm(TrainedSvm),
    Knn(KnnModel),
    Tree(TreeModel),
    Mlp(MlpModel),
}

impl PicModel {
    /// Confidence in `[0, 1]` that `x` belongs to the column's positive
    /// superclass: logistic-squashed margin for SVM, neighbor-vote fraction
    /// for kNN, leaf probability for trees, output share for MLP.
    pub fn confidence(&self, x: &[f64]) -> Result<f64> {
        match self {
            PicModel::Svm(m) => Ok(squash(m.decision(x)?)),
            PicModel::Knn(m) => m.positive_fraction(x),
            PicModel::Tree(m) => m.positive_probability(x),
            PicModel::Mlp(m) => m.positive_score(x),
        }
    }

    /// Hard bit: 1 when the PiC places `x` in the positive superclass.
    pub fn decide(&self, x: &[f64]) -> Result<u8> {
        Ok(match self {
            PicModel::Svm(m) => u8::from(m.decision(x)? > 0.0),
            PicModel::Knn(m) => m.predict(x)? as u8,
            PicModel::Tree(m) => m.predict(x)? as u8,
            PicModel::Mlp(m) => m.predict(x)? as u8,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoding {
    /// Hamming distance between hard PiC bits and each codeword.
    #[default]
    Hard,
    /// L1 distance between PiC confidences and each codeword.
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcocModel {
    pub code: CodingMatrix,
    pub pic_kind: LearnerConfig,
    pub pics: Vec<PicModel>,
    pub label_names: Vec<String>,
    pub dim: usize,
    #[serde(default)]
    pub decoding: Decoding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub label: usize,
    /// Per-class distance to the PiC output vector.
    pub distances: Vec<f64>,
    /// `Λ(x)`: hard bits or confidences, one per column.
    pub predicted_bits: Vec<f64>,
}

/// Nearest codeword under L1 distance (Hamming for 0/1 inputs); ties go to
/// the lowest class index.
pub fn decode_vector(code: &CodingMatrix, outputs: &[f64]) -> Result<DecodeResult> {
    if outputs.len() != code.n() {
        return Err(Error::shape(code.n(), outputs.len()));
    }
    let distances: Vec<f64> = (0..code.m())
        .map(|i| {
            code.row(i)
                .iter()
                .zip(outputs)
                .map(|(&c, &o)| (f64::from(c) - o).abs())
                .sum()
        })
        .collect();
    let mut label = 0;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[label] {
            label = i;
        }
    }
    Ok(DecodeResult {
        label,
        distances,
        predicted_bits: outputs.to_vec(),
    })
}

/// Hamming decoding of a hard bit vector.
pub fn decode_bits(code: &CodingMatrix, bits: &[u8]) -> Result<DecodeResult> {
    let outputs: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
    decode_vector(code, &outputs)
}

fn column_labels(ds: &Dataset, code: &CodingMatrix, j: usize) -> Vec<usize> {
    ds.labels()
        .iter()
        .map(|&l| code.get(l, j) as usize)
        .collect()
}

/// Trains one PiC per column on the full training set relabeled into the
/// column's two superclasses. Column `j` is trained with seed `seed + j`.
pub fn ecoc_train(
    ds: &Dataset,
    code: &CodingMatrix,
    pic: &LearnerConfig,
    seed: u64,
) -> Result<EcocModel> {
    if ds.n_classes() != code.m() {
        return Err(Error::shape(code.m(), ds.n_classes()));
    }
    if let Some(missing) = ds.class_counts().iter().position(|&c| c == 0) {
        return Err(Error::Label(format!(
            "class {:?} is absent from the training data",
            ds.label_names()[missing]
        )));
    }
    let violations = validate_code(code);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::Config(format!(
            "invalid coding matrix: {}",
            text.join("; ")
        )));
    }
    pic.validate()?;

    let names = vec!["negative".to_string(), "positive".to_string()];
    let column_seed = |j: usize| seed.wrapping_add(j as u64);
    let pics: Vec<PicModel> = match *pic {
        LearnerConfig::Svm(spec) => {
            let kernel = spec.params(ds.dim(), seed).kernel;
            let gram = Gram::new(ds.features(), ds.dim(), &kernel);
            (0..code.n())
                .into_par_iter()
                .map(|j| {
                    let labels: Vec<f64> = column_labels(ds, code, j)
                        .into_iter()
                        .map(|b| if b == 1 { 1.0 } else { -1.0 })
                        .collect();
                    let params = spec.params(ds.dim(), column_seed(j));
                    svm_train_with_gram(ds.features(), ds.dim(), &labels, &gram, &params)
                        .map(PicModel::Svm)
                })
                .collect::<Result<_>>()?
        }
        _ => (0..code.n())
            .into_par_iter()
            .map(|j| {
                let binary = ds.relabeled(column_labels(ds, code, j), names.clone())?;
                Ok(match *pic {
                    LearnerConfig::Knn { k } => PicModel::Knn(KnnModel::fit(&binary, k)?),
                    LearnerConfig::Tree {
                        max_depth,
                        min_leaf,
                    } => PicModel::Tree(tree_train(&binary, max_depth, min_leaf)?),
                    LearnerConfig::Mlp { hidden, lr, epochs } => {
                        PicModel::Mlp(mlp_train(&binary, hidden, lr, epochs, column_seed(j))?)
                    }
                    LearnerConfig::Svm(_) => unreachable!(),
                })
            })
            .collect::<Result<_>>()?,
    };

    Ok(EcocModel {
        code: code.clone(),
        pic_kind: *pic,
        pics,
        label_names: ds.label_names().to_vec(),
        dim: ds.dim(),
        decoding: Decoding::Hard,
    })
}

impl EcocModel {
    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::shape(self.dim, x.len()));
        }
        Ok(())
    }

    pub fn with_decoding(mut self, decoding: Decoding) -> Self {
        self.decoding = decoding;
        self
    }

    /// Hard PiC bits `Λ(x)`.
    pub fn predicted_bits(&self, x: &[f64]) -> Result<Vec<u8>> {
        self.check(x)?;
        self.pics.iter().map(|p| p.decide(x)).collect()
    }

    pub fn confidences(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        self.pics.iter().map(|p| p.confidence(x)).collect()
    }

    pub fn decode(&self, x: &[f64]) -> Result<DecodeResult> {
        match self.decoding {
            Decoding::Hard => ecoc_decode_hard(self, x),
            Decoding::Soft => ecoc_decode_soft(self, x),
        }
    }
}

/// `argmin_i Hamming(C_i, Λ(x))`, ties to the lowest class index.
pub fn ecoc_decode_hard(model: &EcocModel, x: &[f64]) -> Result<DecodeResult> {
    decode_bits(&model.code, &model.predicted_bits(x)?)
}

/// `argmin_i Σ_j |C_ij − c_j(x)|`, ties to the lowest class index.
pub fn ecoc_decode_soft(model: &EcocModel, x: &[f64]) -> Result<DecodeResult> {
    decode_vector(&model.code, &model.confidences(x)?)
}

impl Classifier for EcocModel {
    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.decode(x)?.label)
    }

    fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        let svms: Option<Vec<&TrainedSvm>> = self
            .pics
            .iter()
            .map(|p| match p {
                PicModel::Svm(m) => Some(m),
                _ => None,
            })
            .collect();
        let Some(bank) = svms.as_deref().and_then(SupportBank::new) else {
            return (0..ds.len())
                .into_par_iter()
                .map(|i| self.predict(ds.row(i)))
                .collect();
        };
        (0..ds.len())
            .into_par_iter()
            .map(|i| {
                let f = bank.decisions(ds.row(i))?;
                let outputs: Vec<f64> = match self.decoding {
                    Decoding::Hard => f.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect(),
                    Decoding::Soft => f.into_iter().map(squash).collect(),
                };
                Ok(decode_vector(&self.code, &outputs)?.label)
            })
            .collect()
    }
}
