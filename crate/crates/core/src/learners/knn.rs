use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::squared_distance;

/// Lazy learner: keeps the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: Dataset,
}

/// Per-class neighbor counts for `x`. Distance ties keep the lower sample index.
pub fn knn_votes(train: &Dataset, k: usize, x: &[f64]) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::EmptyInput("knn training set is empty".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::Range(format!(
            "knn k={k} must be in [1, {}]",
            train.len()
        )));
    }
    train.check_dim(x)?;
    let mut dist: Vec<(f64, usize)> = train
        .rows()
        .enumerate()
        .map(|(i, r)| (squared_distance(r, x), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, cmp);
    }
    let mut votes = vec![0; train.n_classes()];
    for &(_, i) in &dist[..k] {
        votes[train.label(i)] += 1;
    }
    Ok(votes)
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_count(votes: &[usize]) -> usize {
    let mut best = 0;
    for (i, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = i;
        }
    }
    best
}

/// Majority vote of the `k` Euclidean nearest neighbors.
pub fn knn_predict(train: &Dataset, k: usize, x: &[f64]) -> Result<usize> {
    Ok(argmax_count(&knn_votes(train, k, x)?))
}

impl KnnModel {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("knn training set is empty".into()));
        }
        // Clamp so small (e.g. bootstrap) training sets stay usable.
        Ok(Self {
            k: k.clamp(1, train.len()),
            train: train.clone(),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        knn_predict(&self.train, self.k, x)
    }

    /// Fraction of neighbors voting for class 1.
    pub fn positive_fraction(&self, x: &[f64]) -> Result<f64> {
        let votes = knn_votes(&self.train, self.k, x)?;
        Ok(votes.get(1).copied().unwrap_or(0) as f64 / self.k as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Dataset {
        // A at 0, 1; B at 2; C at 10
        Dataset::from_rows(
            &[vec![0.0], vec![1.0], vec![2.0], vec![10.0]],
            vec![0, 0, 1, 2],
            vec!["A".into(), "B".into(), "C".into()],
        )
        .unwrap()
    }

    #[test]
    fn nearest_point_label() {
        assert_eq!(knn_predict(&abc(), 1, &[10.0]).unwrap(), 2);
        assert_eq!(knn_predict(&abc(), 1, &[2.0]).unwrap(), 1);
    }

    #[test]
    fn majority_of_three() {
        assert_eq!(knn_predict(&abc(), 3, &[1.2]).unwrap(), 0);
    }

    #[test]
    fn vote_tie_goes_to_lower_class() {
        // Neighbors of 1.6 at k=2: 2.0 (B) then 1.0 (A).
        assert_eq!(knn_predict(&abc(), 2, &[1.6]).unwrap(), 0);
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        let ds = Dataset::with_numeric_names(&[vec![-1.0], vec![1.0]], vec![1, 0]).unwrap();
        assert_eq!(knn_predict(&ds, 1, &[0.0]).unwrap(), 1);
    }

    #[test]
    fn errors() {
        let empty = Dataset::from_flat(vec![], 1, vec![], vec!["a".into()]).unwrap();
        assert!(matches!(
            knn_predict(&empty, 1, &[0.0]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            knn_predict(&abc(), 5, &[0.0]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            knn_predict(&abc(), 1, &[0.0, 1.0]),
            Err(Error::Shape { .. })
        ));
    }
}
