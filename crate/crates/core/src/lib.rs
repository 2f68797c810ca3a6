//! Multiclass classification built around error-correcting output codes.
//!
//! The crate is split along the pipeline:
//!
//! - [`dataset`]: CSV and PGM ingestion, binarization, cropping, resizing, splits.
//! - [`features`]: PCA projection fitted by Jacobi eigen-decomposition.
//! - [`learners`]: SMO-trained kernel SVM, kNN, entropy decision tree, MLP,
//!   and the one-vs-all SVM wrapper.
//! - [`ensembles`]: bagging, resampling AdaBoost.M1 and the majority-vote
//!   error probability.
//! - [`ecoc`]: coding matrices, per-column training, Hamming and soft decoding,
//!   and the correct-decoding bound.
//! - [`experiment`]: repeated-run protocol, sweeps, synthetic data and reports.

pub mod archive;
pub mod dataset;
pub mod ecoc;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod features;
pub mod learners;
pub mod linalg;
pub mod seed;
pub mod stats;

pub use dataset::{Dataset, SplitSpec};
pub use ecoc::{CodingMatrix, DecodeResult, EcocModel};
pub use error::{Error, ErrorKind, Result};
pub use features::PcaModel;
pub use learners::{Classifier, Learner, LearnerConfig, MulticlassModel};
