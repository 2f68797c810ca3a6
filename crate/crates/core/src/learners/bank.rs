use std::collections::HashMap;

use crate::error::{Error, Result};

use super::kernel::KernelConfig;
use super::svm::TrainedSvm;

/// Support vectors pooled across machines that share a kernel, so each
/// distinct vector is compared with a query once. Decision values are
/// bit-identical to [`TrainedSvm::decision`].
pub struct SupportBank<'a> {
    kernel: KernelConfig,
    dim: usize,
    rows: Vec<&'a [f64]>,
    terms: Vec<Vec<(usize, f64)>>,
    biases: Vec<f64>,
}

impl<'a> SupportBank<'a> {
    /// `None` when the machines disagree on kernel or dimension.
    pub fn new(models: &[&'a TrainedSvm]) -> Option<Self> {
        let first = models.first()?;
        if models
            .iter()
            .any(|m| m.kernel != first.kernel || m.dim != first.dim)
        {
            return None;
        }
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut rows = Vec::new();
        let mut terms = Vec::with_capacity(models.len());
        for m in models {
            let mut t = Vec::with_capacity(m.n_support());
            for (i, (&a, &y)) in m.alphas.iter().zip(&m.sv_labels).enumerate() {
                let sv = m.support_vector(i);
                let key: Vec<u64> = sv.iter().map(|v| v.to_bits()).collect();
                let slot = *index.entry(key).or_insert_with(|| {
                    rows.push(sv);
                    rows.len() - 1
                });
                t.push((slot, a * y));
            }
            terms.push(t);
        }
        Some(Self {
            kernel: first.kernel,
            dim: first.dim,
            rows,
            terms,
            biases: models.iter().map(|m| m.bias).collect(),
        })
    }

    pub fn distinct_vectors(&self) -> usize {
        self.rows.len()
    }

    /// One decision value per machine.
    pub fn decisions(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::shape(self.dim, x.len()));
        }
        let k: Vec<f64> = self.rows.iter().map(|sv| self.kernel.eval(x, sv)).collect();
        Ok(self
            .terms
            .iter()
            .zip(&self.biases)
            .map(|(t, &b)| t.iter().fold(b, |f, &(slot, ay)| f + ay * k[slot]))
            .collect())
    }
}
