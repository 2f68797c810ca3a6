use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, squared_distance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelConfig {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelConfig::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(
                Error::Range(format!("rbf gamma must be positive, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelConfig::Linear => dot(x, z),
            KernelConfig::Rbf { gamma } => (-gamma * squared_distance(x, z)).exp(),
        }
    }
}

/// `K(x, z)`: dot product for linear, `exp(−γ‖x−z‖²)` for rbf.
pub fn kernel_eval(cfg: &KernelConfig, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::shape(x.len(), z.len()));
    }
    Ok(cfg.eval(x, z))
}

/// Full kernel matrix over a set of rows. Shared by every binary problem
/// built on the same training rows.
#[derive(Debug, Clone)]
pub struct Gram {
    n: usize,
    values: Vec<f32>,
}

impl Gram {
    pub fn new(features: &[f64], dim: usize, kernel: &KernelConfig) -> Self {
        let n = features.len().checked_div(dim).unwrap_or(0);
        let row = |i: usize| &features[i * dim..(i + 1) * dim];
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = kernel.eval(row(i), row(j)) as f32;
                values[i * n + j] = k;
                values[j * n + i] = k;
            }
        }
        Self { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        f64::from(self.values[i * self.n + j])
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}
