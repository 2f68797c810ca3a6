//! One-hidden-layer sigmoid perceptron trained by full-batch gradient descent
//! on the summed squared error against one-hot targets.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub dim: usize,
    pub hidden: usize,
    pub n_classes: usize,
    /// `hidden × dim`, row-major.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    /// `n_classes × hidden`, row-major.
    pub output_weights: Vec<f64>,
    pub output_bias: Vec<f64>,
}

/// Same layout as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpModel {
    /// Weights uniform in [−0.5, 0.5].
    pub fn init(dim: usize, hidden: usize, n_classes: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut draw =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect() };
        let hidden_weights = draw(hidden * dim);
        let hidden_bias = draw(hidden);
        let output_weights = draw(n_classes * hidden);
        let output_bias = draw(n_classes);
        Self {
            dim,
            hidden,
            n_classes,
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
        }
    }

    fn forward(&self, x: &[f64], h: &mut [f64], o: &mut [f64]) {
        for (j, hj) in h.iter_mut().enumerate() {
            let w = &self.hidden_weights[j * self.dim..(j + 1) * self.dim];
            *hj = sigmoid(self.hidden_bias[j] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
        for (c, oc) in o.iter_mut().enumerate() {
            let w = &self.output_weights[c * self.hidden..(c + 1) * self.hidden];
            *oc = sigmoid(
                self.output_bias[c] + w.iter().zip(h.iter()).map(|(a, b)| a * b).sum::<f64>(),
            );
        }
    }

    /// Output-layer activations for `x`.
    pub fn outputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::shape(self.dim, x.len()));
        }
        let mut h = vec![0.0; self.hidden];
        let mut o = vec![0.0; self.n_classes];
        self.forward(x, &mut h, &mut o);
        Ok(o)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        mlp_predict(self, x)
    }

    /// Share of output activation on class 1.
    pub fn positive_score(&self, x: &[f64]) -> Result<f64> {
        let o = self.outputs(x)?;
        let pos = o.get(1).copied().unwrap_or(0.0);
        let total: f64 = o.iter().sum();
        Ok(if total > 0.0 { pos / total } else { 0.5 })
    }

    /// `Σₙ ½‖o(xₙ) − tₙ‖²` with one-hot targets `tₙ`.
    pub fn loss(&self, ds: &Dataset) -> f64 {
        self.loss_and_gradient(ds, false).0
    }

    pub fn gradient(&self, ds: &Dataset) -> MlpGradient {
        self.loss_and_gradient(ds, true).1
    }

    fn loss_and_gradient(&self, ds: &Dataset, want_grad: bool) -> (f64, MlpGradient) {
        let mut g = MlpGradient {
            hidden_weights: vec![0.0; self.hidden_weights.len()],
            hidden_bias: vec![0.0; self.hidden],
            output_weights: vec![0.0; self.output_weights.len()],
            output_bias: vec![0.0; self.n_classes],
        };
        let mut h = vec![0.0; self.hidden];
        let mut o = vec![0.0; self.n_classes];
        let mut delta_o = vec![0.0; self.n_classes];
        let mut loss = 0.0;
        for (x, &label) in ds.rows().zip(ds.labels()) {
            self.forward(x, &mut h, &mut o);
            for c in 0..self.n_classes {
                let t = if c == label { 1.0 } else { 0.0 };
                let err = o[c] - t;
                loss += 0.5 * err * err;
                delta_o[c] = err * o[c] * (1.0 - o[c]);
            }
            if !want_grad {
                continue;
            }
            for c in 0..self.n_classes {
                let d = delta_o[c];
                g.output_bias[c] += d;
                for (gw, hj) in g.output_weights[c * self.hidden..(c + 1) * self.hidden]
                    .iter_mut()
                    .zip(&h)
                {
                    *gw += d * hj;
                }
            }
            for j in 0..self.hidden {
                let back: f64 = (0..self.n_classes)
                    .map(|c| self.output_weights[c * self.hidden + j] * delta_o[c])
                    .sum();
                let d = back * h[j] * (1.0 - h[j]);
                g.hidden_bias[j] += d;
                for (gw, xi) in g.hidden_weights[j * self.dim..(j + 1) * self.dim]
                    .iter_mut()
                    .zip(x)
                {
                    *gw += d * xi;
                }
            }
        }
        (loss, g)
    }

    fn descend(&mut self, g: &MlpGradient, lr: f64) {
        let step = |w: &mut [f64], d: &[f64]| w.iter_mut().zip(d).for_each(|(w, d)| *w -= lr * d);
        step(&mut self.hidden_weights, &g.hidden_weights);
        step(&mut self.hidden_bias, &g.hidden_bias);
        step(&mut self.output_weights, &g.output_weights);
        step(&mut self.output_bias, &g.output_bias);
    }
}

pub fn mlp_train(
    ds: &Dataset,
    hidden: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<MlpModel> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("mlp training set is empty".into()));
    }
    if hidden == 0 || !(lr > 0.0) {
        return Err(Error::Range(format!(
            "mlp needs hidden >= 1 and lr > 0 (got {hidden}, {lr})"
        )));
    }
    let mut model = MlpModel::init(ds.dim(), hidden, ds.n_classes(), seed);
    for _ in 0..epochs {
        let g = model.gradient(ds);
        model.descend(&g, lr);
    }
    Ok(model)
}

/// Argmax of the output layer; ties go to the lowest class index.
pub fn mlp_predict(model: &MlpModel, x: &[f64]) -> Result<usize> {
    let o = model.outputs(x)?;
    let mut best = 0;
    for (c, &v) in o.iter().enumerate() {
        if v > o[best] {
            best = c;
        }
    }
    Ok(best)
}
