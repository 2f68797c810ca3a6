//! PCA feature extraction: fit the top-k principal directions of the
//! training features and project any dataset onto them.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigen};

/// Number of components used when none is configured.
pub const DEFAULT_COMPONENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k × d`, row-major; rows are unit principal directions.
    pub components: Vec<f64>,
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    pub k: usize,
    pub d: usize,
}

impl PcaModel {
    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i * self.d..(i + 1) * self.d]
    }

    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::shape(self.d, x.len()));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok((0..self.k)
            .map(|i| dot(self.component(i), &centered))
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.d {
            return Err(Error::shape(self.d, self.mean.len()));
        }
        if self.components.len() != self.k * self.d {
            return Err(Error::shape(self.k * self.d, self.components.len()));
        }
        if self.eigenvalues.len() != self.k {
            return Err(Error::shape(self.k, self.eigenvalues.len()));
        }
        Ok(())
    }
}

/// Flip `v` so that its largest-magnitude entry is positive. Entries within
/// 1e-9 of the maximum count as ties, resolved to the lowest index.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(&lead) = v.iter().find(|x| x.abs() >= max - 1e-9 * max) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Top-`k` eigenpairs of the sample covariance (divisor `n − 1`).
///
/// When there are fewer samples than features the decomposition runs on the
/// `n × n` Gram matrix of the centered data instead; both share the same
/// non-zero spectrum. Null-space directions, if requested, are completed by
/// Gram-Schmidt over the standard basis.
pub fn pca_fit(ds: &Dataset, k: usize) -> Result<PcaModel> {
    let n = ds.len();
    let d = ds.dim();
    if n < 2 {
        return Err(Error::Range(format!(
            "PCA needs at least 2 samples, got {n}"
        )));
    }
    if k == 0 || k > d.min(n - 1) {
        return Err(Error::Range(format!(
            "PCA component count {k} not in [1, {}]",
            d.min(n - 1)
        )));
    }

    let mut mean = vec![0.0; d];
    for row in ds.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<f64> = ds
        .rows()
        .flat_map(|row| {
            row.iter()
                .zip(&mean)
                .map(|(x, m)| x - m)
                .collect::<Vec<_>>()
        })
        .collect();
    if centered.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    let scale = 1.0 / (n as f64 - 1.0);

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    if d <= n {
        let mut cov = vec![0.0; d * d];
        for r in 0..n {
            let row = &centered[r * d..(r + 1) * d];
            for i in 0..d {
                let xi = row[i];
                if xi == 0.0 {
                    continue;
                }
                for j in i..d {
                    cov[i * d + j] += xi * row[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                cov[i * d + j] *= scale;
                cov[j * d + i] = cov[i * d + j];
            }
        }
        let eig = symmetric_eigen(&cov, d);
        pairs.extend(eig.values.into_iter().zip(eig.vectors).take(k));
    } else {
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let g = dot(&centered[i * d..(i + 1) * d], &centered[j * d..(j + 1) * d]) * scale;
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }
        let eig = symmetric_eigen(&gram, n);
        let top = eig.values[0];
        for (value, u) in eig.values.into_iter().zip(eig.vectors).take(k) {
            if value <= 1e-12 * top {
                break;
            }
            let mut v = vec![0.0; d];
            for (r, &ur) in u.iter().enumerate() {
                for (vj, xj) in v.iter_mut().zip(&centered[r * d..(r + 1) * d]) {
                    *vj += ur * xj;
                }
            }
            normalize(&mut v);
            pairs.push((value, v));
        }
        let mut basis = 0;
        while pairs.len() < k && basis < d {
            let mut v = vec![0.0; d];
            v[basis] = 1.0;
            basis += 1;
            for _ in 0..2 {
                for (_, u) in &pairs {
                    let proj = dot(&v, u);
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= proj * b);
                }
            }
            if normalize(&mut v) > 1e-6 {
                pairs.push((0.0, v));
            }
        }
    }

    let mut components = Vec::with_capacity(k * d);
    let mut eigenvalues = Vec::with_capacity(k);
    for (value, mut v) in pairs {
        fix_sign(&mut v);
        components.extend_from_slice(&v);
        eigenvalues.push(value.max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        k,
        d,
    })
}

/// Projects every row onto the model's components; labels pass through.
pub fn pca_transform(model: &PcaModel, ds: &Dataset) -> Result<Dataset> {
    if ds.dim() != model.d {
        return Err(Error::shape(model.d, ds.dim()));
    }
    let mut out = Vec::with_capacity(ds.len() * model.k);
    for row in ds.rows() {
        out.extend(model.transform_row(row)?);
    }
    ds.with_features(out, model.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(rows: &[Vec<f64>]) -> Dataset {
        Dataset::with_numeric_names(rows, vec![0; rows.len()]).unwrap()
    }

    #[test]
    fn line_data() {
        let data = ds(&[vec![1., 1.], vec![2., 2.], vec![3., 3.], vec![4., 4.]]);
        let m = pca_fit(&data, 1).unwrap();
        let h = 0.5f64.sqrt();
        assert!((m.component(0)[0] - h).abs() < 1e-8);
        assert!((m.component(0)[1] - h).abs() < 1e-8);
        // Variance along the line: 2 * var(1..4) = 2 * 5/3.
        assert!((m.eigenvalues[0] - 10.0 / 3.0).abs() < 1e-12);

        let m2 = pca_fit(&data, 2).unwrap();
        assert!(m2.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn axis_aligned_pair() {
        let m = pca_fit(&ds(&[vec![1., 0.], vec![-1., 0.]]), 1).unwrap();
        assert_eq!(m.component(0), &[1.0, 0.0]);
        assert!((m.eigenvalues[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let same = ds(&[vec![1., 2.], vec![1., 2.], vec![1., 2.]]);
        assert!(matches!(
            pca_fit(&same, 1),
            Err(Error::DegenerateCovariance)
        ));
        let line = ds(&[vec![1., 1.], vec![2., 2.], vec![3., 3.]]);
        assert!(matches!(pca_fit(&line, 0), Err(Error::Range(_))));
        assert!(matches!(pca_fit(&line, 3), Err(Error::Range(_))));
        let m = pca_fit(&line, 1).unwrap();
        let wrong = ds(&[vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            pca_transform(&m, &wrong),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn mean_maps_to_origin() {
        let data = ds(&[
            vec![1., 5., 2.],
            vec![3., 1., 0.],
            vec![0., 2., 7.],
            vec![4., 4., 4.],
        ]);
        let m = pca_fit(&data, 2).unwrap();
        let z = m.transform_row(&m.mean).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn wide_data_uses_gram_route() {
        // 4 samples in 6 dimensions, rank 3 after centering.
        let data = ds(&[
            vec![1., 0., 0., 2., 0., 1.],
            vec![0., 1., 0., 0., 3., 1.],
            vec![0., 0., 1., 1., 1., 0.],
            vec![1., 1., 1., 0., 0., 0.],
        ]);
        let m = pca_fit(&data, 3).unwrap();
        let trace: f64 = {
            let full = pca_fit(&data, 3).unwrap();
            full.eigenvalues.iter().sum()
        };
        // Sample-covariance trace computed directly.
        let n = data.len() as f64;
        let mut direct = 0.0;
        for j in 0..6 {
            let mu: f64 = data.rows().map(|r| r[j]).sum::<f64>() / n;
            direct += data.rows().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / (n - 1.0);
        }
        assert!((trace - direct).abs() < 1e-9 * direct);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(m.component(i), m.component(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn serializes_expected_fields() {
        let m = pca_fit(&ds(&[vec![1., 0.], vec![-1., 0.]]), 1).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        for key in ["mean", "components", "eigenvalues", "k", "d"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    fn reconstruction_error(m: &PcaModel, data: &Dataset) -> f64 {
        let mut total = 0.0;
        for row in data.rows() {
            let z = m.transform_row(row).unwrap();
            for j in 0..m.d {
                let rec: f64 = (0..m.k).map(|i| m.component(i)[j] * z[i]).sum();
                total += (row[j] - m.mean[j] - rec).powi(2);
            }
        }
        total
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn model_invariants(raw in prop::collection::vec(-5.0f64..5.0, 24..=24)) {
            // 6 samples x 4 features
            let rows: Vec<Vec<f64>> = raw.chunks(4).map(<[f64]>::to_vec).collect();
            let data = ds(&rows);
            let m = pca_fit(&data, 4).unwrap();
            for i in 0..4 {
                prop_assert!((dot(m.component(i), m.component(i)) - 1.0).abs() < 1e-8);
                for j in (i + 1)..4 {
                    prop_assert!(dot(m.component(i), m.component(j)).abs() < 1e-8);
                }
            }
            for w in m.eigenvalues.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }

            let mut last = f64::INFINITY;
            for k in 1..=4 {
                let mk = pca_fit(&data, k).unwrap();
                let err = reconstruction_error(&mk, &data);
                prop_assert!(err <= last + 1e-9);
                last = err;
            }

            let projected = pca_transform(&m, &data).unwrap();
            for c in 0..4 {
                let var: f64 = projected.rows().map(|r| r[c] * r[c]).sum::<f64>() / 5.0;
                let lam = m.eigenvalues[c];
                prop_assert!((var - lam).abs() <= 1e-6 * lam.max(1e-9));
            }

            for a in 0..6 {
                for b in 0..6 {
                    let before: f64 = crate::linalg::squared_distance(data.row(a), data.row(b));
                    let after = crate::linalg::squared_distance(projected.row(a), projected.row(b));
                    prop_assert!((before.sqrt() - after.sqrt()).abs() < 1e-8);
                }
            }
        }
    }
}
