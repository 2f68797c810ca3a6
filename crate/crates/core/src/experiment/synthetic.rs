use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Gaussian blobs around uniformly placed class centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    pub center_spread: f64,
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    /// 32 classes of 100 samples in 64 dimensions.
    pub fn desk32() -> Self {
        Self {
            classes: 32,
            per_class: 100,
            dim: 64,
            center_spread: 3.0,
            noise_sigma: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.per_class == 0 || self.dim == 0 {
            return Err(Error::Config(
                "synthetic spec needs classes >= 2, per_class >= 1 and dim >= 1".into(),
            ));
        }
        if !(self.center_spread > 0.0 && self.center_spread.is_finite()) {
            return Err(Error::Config("center_spread must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config("noise_sigma must be nonnegative".into()));
        }
        Ok(())
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed);
    let centers: Vec<f64> = (0..spec.classes * spec.dim)
        .map(|_| rng.random_range(-spec.center_spread..=spec.center_spread))
        .collect();
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut features = Vec::with_capacity(spec.classes * spec.per_class * spec.dim);
    let mut labels = Vec::with_capacity(spec.classes * spec.per_class);
    for c in 0..spec.classes {
        let center = &centers[c * spec.dim..(c + 1) * spec.dim];
        for _ in 0..spec.per_class {
            features.extend(center.iter().map(|&v| v + noise.sample(&mut rng)));
            labels.push(c);
        }
    }
    let width = (spec.classes - 1).to_string().len();
    let names = (0..spec.classes).map(|c| format!("c{c:0width$}")).collect();
    Dataset::from_flat(features, spec.dim, labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let spec = SyntheticSpec {
            classes: 4,
            per_class: 50,
            dim: 3,
            center_spread: 2.0,
            noise_sigma: 0.5,
            seed: 9,
        };
        let ds = generate_synthetic(&spec).unwrap();
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.class_counts(), vec![50; 4]);
        assert_eq!(ds, generate_synthetic(&spec).unwrap());
        assert_eq!(ds.label_names()[3], "c3");
    }

    #[test]
    fn zero_noise_rows_are_centers() {
        let spec = SyntheticSpec {
            noise_sigma: 0.0,
            per_class: 5,
            ..SyntheticSpec::desk32()
        };
        let ds = generate_synthetic(&spec).unwrap();
        for i in 0..ds.len() {
            let first = ds.label(i) * 5;
            assert_eq!(ds.row(i), ds.row(first));
            assert!(ds.row(i).iter().all(|v| v.abs() <= 3.0));
        }
        assert_eq!(ds.label_names()[0], "c00");
    }

    #[test]
    fn invalid_specs() {
        let bad = SyntheticSpec {
            center_spread: 0.0,
            ..SyntheticSpec::desk32()
        };
        assert!(matches!(generate_synthetic(&bad), Err(Error::Config(_))));
        let one = SyntheticSpec {
            classes: 1,
            ..SyntheticSpec::desk32()
        };
        assert!(one.validate().is_err());
    }
}
