//! Soft-margin kernel SVM trained by simplified SMO.
//!
//! The dual being solved is
//!
//! ```text
//! max  Σ αᵢ − ½ Σᵢ Σⱼ αᵢ αⱼ yᵢ yⱼ K(xᵢ, xⱼ)
//! s.t. 0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! and the decision function is `f(x) = Σ αᵢ yᵢ K(x, xᵢ) + b`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::kernel::{Gram, KernelConfig};

/// Coefficients at or below this are dropped from the trained model.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

// Smallest α_j move that counts as progress.
const MIN_STEP: f64 = 1e-12;
const MAX_POLISH_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelConfig,
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::Rbf { gamma: 1.0 },
            c: 10.0,
            tol: 1e-3,
            max_passes: 10,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Range(format!(
                "svm C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Range(format!(
                "svm tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Two-class training data with labels in {−1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLabeled {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<f64>,
}

impl BinaryLabeled {
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<f64>) -> Result<Self> {
        if features.len() != dim * labels.len() {
            return Err(Error::shape(dim * labels.len(), features.len()));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::Label("binary labels must be -1 or +1".into()));
        }
        if !labels.contains(&1.0) || !labels.contains(&-1.0) {
            return Err(Error::Label("both classes must be present".into()));
        }
        Ok(Self {
            features,
            dim,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Self::new(rows.concat(), dim, labels)
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// Raw SMO output over every training point.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Full passes over the data.
    pub passes: usize,
}

impl SmoSolution {
    /// `f(xᵢ)` for training point `i`.
    pub fn decision_at(&self, gram: &Gram, labels: &[f64], i: usize) -> f64 {
        let row = gram.row(i);
        let mut f = self.bias;
        for (j, (&a, &y)) in self.alphas.iter().zip(labels).enumerate() {
            if a != 0.0 {
                f += a * y * f64::from(row[j]);
            }
        }
        f
    }
}

/// Dual objective `Σα − ½ αᵀQα` with `Q_ij = yᵢ yⱼ K_ij`.
pub fn dual_objective(alphas: &[f64], labels: &[f64], gram: &Gram) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] * gram.get(i, j);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Indices of training points whose margin violates the KKT conditions by
/// more than `tol`.
pub fn kkt_violations(
    sol: &SmoSolution,
    gram: &Gram,
    labels: &[f64],
    c: f64,
    tol: f64,
) -> Vec<usize> {
    (0..labels.len())
        .filter(|&i| {
            let m = labels[i] * sol.decision_at(gram, labels, i);
            let a = sol.alphas[i];
            if a <= 0.0 {
                m < 1.0 - tol
            } else if a >= c {
                m > 1.0 + tol
            } else {
                (m - 1.0).abs() > tol
            }
        })
        .collect()
}

struct Smo<'a> {
    gram: &'a Gram,
    y: &'a [f64],
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    // Σ αⱼ yⱼ K_ij, without the bias.
    f: Vec<f64>,
    b: f64,
}

impl Smo<'_> {
    #[inline]
    fn error(&self, i: usize) -> f64 {
        self.f[i] + self.b - self.y[i]
    }

    #[inline]
    fn violates(&self, i: usize) -> bool {
        let r = self.y[i] * self.error(i);
        (r < -self.tol && self.alpha[i] < self.c) || (r > self.tol && self.alpha[i] > 0.0)
    }

    fn clamp(&self, a: f64) -> f64 {
        if a < 1e-12 * self.c {
            0.0
        } else if a > self.c * (1.0 - 1e-12) {
            self.c
        } else {
            a
        }
    }

    /// Jointly optimizes αᵢ and αⱼ; returns whether anything moved.
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (ei, ej) = (self.error(i), self.error(j));
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        if hi - lo < MIN_STEP {
            return false;
        }
        let (kii, kjj, kij) = (
            self.gram.get(i, i),
            self.gram.get(j, j),
            self.gram.get(i, j),
        );
        let eta = 2.0 * kij - kii - kjj;
        if eta >= 0.0 {
            return false;
        }
        let aj_new = self.clamp((aj - yj * (ei - ej) / eta).clamp(lo, hi));
        if (aj_new - aj).abs() < MIN_STEP {
            return false;
        }
        let ai_new = self.clamp(ai + yi * yj * (aj - aj_new));
        let (dai, daj) = (ai_new - ai, aj_new - aj);

        let b1 = self.b - ei - yi * dai * kii - yj * daj * kij;
        let b2 = self.b - ej - yi * dai * kij - yj * daj * kjj;
        self.b = if ai_new > 0.0 && ai_new < self.c {
            b1
        } else if aj_new > 0.0 && aj_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };

        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        let (ri, rj) = (self.gram.row(i), self.gram.row(j));
        let (si, sj) = (yi * dai, yj * daj);
        for ((fk, &kik), &kjk) in self.f.iter_mut().zip(ri).zip(rj) {
            *fk += si * f64::from(kik) + sj * f64::from(kjk);
        }
        true
    }
}

/// Simplified SMO over a precomputed kernel matrix.
///
/// Each pass visits every KKT violator `i` and pairs it with a second index
/// drawn from the seeded generator. After `max_passes` consecutive passes
/// without progress, any violators left are paired with every other index
/// in turn; if that moves anything the random passes resume.
pub fn smo_solve(gram: &Gram, labels: &[f64], params: &SvmParams) -> Result<SmoSolution> {
    params.validate()?;
    let n = labels.len();
    if gram.len() != n {
        return Err(Error::shape(n, gram.len()));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(Error::Label("both classes must be present".into()));
    }
    let mut rng = seed::rng(params.seed);
    let mut smo = Smo {
        gram,
        y: labels,
        c: params.c,
        tol: params.tol,
        alpha: vec![0.0; n],
        f: vec![0.0; n],
        b: 0.0,
    };

    let mut total_passes = 0;
    for _ in 0..MAX_POLISH_ROUNDS {
        let mut quiet = 0;
        while quiet < params.max_passes {
            total_passes += 1;
            let mut changed = 0;
            for i in 0..n {
                if smo.violates(i) {
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    if smo.take_step(i, j) {
                        changed += 1;
                    }
                }
            }
            quiet = if changed == 0 { quiet + 1 } else { 0 };
        }

        let mut changed = 0;
        for i in 0..n {
            if smo.violates(i) && (0..n).any(|j| smo.take_step(i, j)) {
                changed += 1;
            }
        }
        if changed == 0 {
            break;
        }
    }

    Ok(SmoSolution {
        alphas: smo.alpha,
        bias: smo.b,
        passes: total_passes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSvm {
    pub alphas: Vec<f64>,
    /// Row-major support vectors, `alphas.len() × dim`.
    pub sv_features: Vec<f64>,
    pub sv_labels: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelConfig,
    pub dim: usize,
}

impl TrainedSvm {
    /// Keeps the points with `α > SUPPORT_THRESHOLD`.
    pub fn from_solution(
        sol: &SmoSolution,
        features: &[f64],
        dim: usize,
        labels: &[f64],
        kernel: KernelConfig,
    ) -> Result<Self> {
        let mut model = TrainedSvm {
            alphas: Vec::new(),
            sv_features: Vec::new(),
            sv_labels: Vec::new(),
            bias: sol.bias,
            kernel,
            dim,
        };
        for (i, &a) in sol.alphas.iter().enumerate() {
            if a > SUPPORT_THRESHOLD {
                model.alphas.push(a);
                model
                    .sv_features
                    .extend_from_slice(&features[i * dim..(i + 1) * dim]);
                model.sv_labels.push(labels[i]);
            }
        }
        if model.alphas.is_empty() {
            return Err(Error::Label("training produced no support vectors".into()));
        }
        Ok(model)
    }

    pub fn n_support(&self) -> usize {
        self.alphas.len()
    }

    pub fn support_vector(&self, i: usize) -> &[f64] {
        &self.sv_features[i * self.dim..(i + 1) * self.dim]
    }

    /// `f(x) = Σ αᵢ yᵢ K(x, xᵢ) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::shape(self.dim, x.len()));
        }
        Ok(self.decision_unchecked(x))
    }

    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        let mut f = self.bias;
        for (i, (&a, &y)) in self.alphas.iter().zip(&self.sv_labels).enumerate() {
            f += a * y * self.kernel.eval(x, self.support_vector(i));
        }
        f
    }
}

/// Trains on `data`, building the kernel matrix internally.
pub fn svm_train(data: &BinaryLabeled, params: &SvmParams) -> Result<TrainedSvm> {
    if data.len() < 2 {
        return Err(Error::EmptyInput("svm needs at least 2 samples".into()));
    }
    params.validate()?;
    let gram = Gram::new(data.features(), data.dim(), &params.kernel);
    svm_train_with_gram(data.features(), data.dim(), data.labels(), &gram, params)
}

/// Trains against a kernel matrix precomputed for `features`.
pub fn svm_train_with_gram(
    features: &[f64],
    dim: usize,
    labels: &[f64],
    gram: &Gram,
    params: &SvmParams,
) -> Result<TrainedSvm> {
    let sol = smo_solve(gram, labels, params)?;
    TrainedSvm::from_solution(&sol, features, dim, labels, params.kernel)
}

pub fn svm_decision(model: &TrainedSvm, x: &[f64]) -> Result<f64> {
    model.decision(x)
}
