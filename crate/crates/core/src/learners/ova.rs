use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::bank::SupportBank;
use super::kernel::Gram;
use super::svm::{svm_train_with_gram, SvmParams, TrainedSvm};

/// One binary SVM per class, class `i` against the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsAll {
    pub models: Vec<TrainedSvm>,
}

/// Trains the `m` class-vs-rest machines. Model `i` uses seed
/// `params.seed + i`, so parallel and sequential training agree.
pub fn one_vs_all_train(ds: &Dataset, params: &SvmParams) -> Result<OneVsAll> {
    let m = ds.n_classes();
    if m < 2 {
        return Err(Error::Label(format!(
            "one-vs-all needs at least 2 classes, got {m}"
        )));
    }
    let counts = ds.class_counts();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Label(format!(
            "class {:?} is absent from the training data",
            ds.label_names()[missing]
        )));
    }
    params.validate()?;
    let gram = Gram::new(ds.features(), ds.dim(), &params.kernel);
    let models = (0..m)
        .into_par_iter()
        .map(|class| {
            let labels: Vec<f64> = ds
                .labels()
                .iter()
                .map(|&l| if l == class { 1.0 } else { -1.0 })
                .collect();
            let p = SvmParams {
                seed: params.seed.wrapping_add(class as u64),
                ..*params
            };
            svm_train_with_gram(ds.features(), ds.dim(), &labels, &gram, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OneVsAll { models })
}

/// Class with the largest decision value; ties go to the lowest index.
pub fn one_vs_all_predict(model: &OneVsAll, x: &[f64]) -> Result<usize> {
    let values = model
        .models
        .iter()
        .map(|svm| svm.decision(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax(&values))
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

impl OneVsAll {
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        one_vs_all_predict(self, x)
    }

    /// Same labels as [`OneVsAll::predict`] row by row, with kernel values
    /// shared across the machines.
    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        let refs: Vec<&TrainedSvm> = self.models.iter().collect();
        match SupportBank::new(&refs) {
            Some(bank) => (0..ds.len())
                .into_par_iter()
                .map(|i| bank.decisions(ds.row(i)).map(|d| argmax(&d)))
                .collect(),
            None => ds.rows().map(|x| self.predict(x)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::kernel::KernelConfig;
    use crate::learners::svm::{svm_train, BinaryLabeled};
    use crate::seed;
    use rand_distr::{Distribution, Normal};

    fn blobs(per_class: usize, sigma: f64, seed: u64) -> Dataset {
        let centers = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]];
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = seed::rng(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per_class {
                rows.push(center.iter().map(|&v| v + noise.sample(&mut rng)).collect());
                labels.push(c);
            }
        }
        Dataset::with_numeric_names(&rows, labels).unwrap()
    }

    fn rbf() -> SvmParams {
        SvmParams {
            kernel: KernelConfig::Rbf { gamma: 1.0 },
            c: 10.0,
            ..SvmParams::default()
        }
    }

    #[test]
    fn separated_blobs_are_classified_perfectly() {
        let train = blobs(20, 0.1, 1);
        let test = blobs(20, 0.1, 2);
        let model = one_vs_all_train(&train, &rbf()).unwrap();
        for (x, &l) in test.rows().zip(test.labels()) {
            assert_eq!(model.predict(x).unwrap(), l);
        }
    }

    #[test]
    fn two_classes_agree_with_binary_separator() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 - 4.5]).collect();
        let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let ds = Dataset::with_numeric_names(&rows, labels).unwrap();
        let p = SvmParams {
            kernel: KernelConfig::Linear,
            ..SvmParams::default()
        };
        let ova = one_vs_all_train(&ds, &p).unwrap();
        let binary = svm_train(
            &BinaryLabeled::from_rows(
                &rows,
                ds.labels()
                    .iter()
                    .map(|&l| if l == 1 { 1.0 } else { -1.0 })
                    .collect(),
            )
            .unwrap(),
            &SvmParams {
                seed: p.seed + 1,
                ..p
            },
        )
        .unwrap();
        for x in [-3.0, -0.2, 0.3, 4.0] {
            let expected = usize::from(binary.decision(&[x]).unwrap() > 0.0);
            assert_eq!(ova.predict(&[x]).unwrap(), expected);
        }
    }

    #[test]
    fn missing_class_is_a_label_error() {
        let ds = Dataset::from_rows(
            &[vec![0.0], vec![1.0]],
            vec![0, 1],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        assert!(matches!(
            one_vs_all_train(&ds, &rbf()),
            Err(Error::Label(_))
        ));
    }

    #[test]
    fn equal_decisions_pick_class_zero() {
        let svm = TrainedSvm {
            alphas: vec![1.0],
            sv_features: vec![0.0],
            sv_labels: vec![1.0],
            bias: 0.0,
            kernel: KernelConfig::Linear,
            dim: 1,
        };
        let model = OneVsAll {
            models: vec![svm.clone(), svm.clone(), svm],
        };
        assert_eq!(model.predict(&[5.0]).unwrap(), 0);
    }
}
