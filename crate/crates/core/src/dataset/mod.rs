//! Labeled feature matrices, their loaders, and train/test splitting.

mod csv;
mod image;
mod split;

pub use self::csv::{load_csv, load_csv_unlabeled, read_csv, write_csv};
pub use self::image::{
    binarize, crop_to_content, load_image_dir, otsu_threshold, preprocess, read_pgm,
    resize_nearest, write_pgm, BinaryImage, GrayImage,
};
pub use self::split::{split, SplitSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major feature matrix with one class index per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a flat row-major feature buffer.
    pub fn from_flat(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if features.len() != dim * labels.len() {
            return Err(Error::shape(dim * labels.len(), features.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= label_names.len()) {
            return Err(Error::Label(format!(
                "class index {bad} out of range for {} classes",
                label_names.len()
            )));
        }
        Ok(Self {
            features,
            dim,
            labels,
            label_names,
        })
    }

    pub fn from_rows(
        rows: &[Vec<f64>],
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::shape(rows.len(), labels.len()));
        }
        let mut features = Vec::with_capacity(dim * rows.len());
        for row in rows {
            if row.len() != dim {
                return Err(Error::shape(dim, row.len()));
            }
            features.extend_from_slice(row);
        }
        Self::from_flat(features, dim, labels, label_names)
    }

    /// Convenience constructor that names classes `"0"`, `"1"`, ...
    pub fn with_numeric_names(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let m = labels.iter().max().map_or(0, |&l| l + 1);
        Self::from_rows(rows, labels, (0..m).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of classes `m` (the length of the label-name list).
    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices` (repeats allowed), keeping the label-name map.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            dim: self.dim,
            labels,
            label_names: self.label_names.clone(),
        }
    }

    /// Same rows with replaced features; used by projections.
    pub fn with_features(&self, features: Vec<f64>, dim: usize) -> Result<Dataset> {
        Dataset::from_flat(features, dim, self.labels.clone(), self.label_names.clone())
    }

    /// Same rows relabeled, e.g. to a two-class dichotomy.
    pub fn relabeled(&self, labels: Vec<usize>, label_names: Vec<String>) -> Result<Dataset> {
        Dataset::from_flat(self.features.clone(), self.dim, labels, label_names)
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::shape(self.dim, x.len()));
        }
        Ok(())
    }
}
