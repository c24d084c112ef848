//! Exact k-nearest-neighbour classification on standardized features.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_training_set, Classes, Classifier};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Standardizer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub classes: Classes,
    /// Fitted on the training rows; applied to every query.
    pub standardizer: Standardizer,
    /// Standardized training rows, row-major.
    pub train: Vec<f64>,
    /// Class index of each training row.
    pub train_classes: Vec<usize>,
    pub dim: usize,
}

pub fn knn_fit(features: &FeatureMatrix, labels: &[usize], k: usize) -> Result<KnnModel> {
    check_training_set(features, labels)?;
    if k == 0 || k > features.n_rows() {
        return Err(Error::arg(format!(
            "k-NN needs 1 ≤ k ≤ {} training rows, got k = {k}",
            features.n_rows()
        )));
    }
    let standardizer = Standardizer::fit(features);
    let train = standardizer.apply(features)?.values().to_vec();
    let classes = Classes::from_labels(labels);
    Ok(KnnModel {
        k,
        train_classes: classes.encode(labels),
        classes,
        standardizer,
        train,
        dim: features.n_features(),
    })
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

impl KnnModel {
    fn n_train(&self) -> usize {
        self.train_classes.len()
    }

    /// The k nearest training rows as (squared distance, row), nearest first.
    /// Equal distances admit the lower row index first.
    pub fn neighbors(&self, query: &[f64]) -> Vec<(f64, usize)> {
        let d = self.dim;
        let mut dist: Vec<(f64, usize)> = (0..self.n_train())
            .map(|i| {
                let row = &self.train[i * d..(i + 1) * d];
                let s: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance_then_index);
            dist.truncate(self.k);
        }
        dist.sort_by(by_distance_then_index);
        dist
    }

    /// Plurality vote; a tie between classes goes to the tied class of the
    /// nearest neighbour.
    fn vote(&self, neighbors: &[(f64, usize)]) -> usize {
        let mut votes = vec![0usize; self.classes.len()];
        for &(_, i) in neighbors {
            votes[self.train_classes[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        let winner = neighbors
            .iter()
            .map(|&(_, i)| self.train_classes[i])
            .find(|&c| votes[c] == top)
            .expect("a neighbour carries the top vote");
        self.classes.label(winner)
    }
}

impl Classifier for KnnModel {
    fn classes(&self) -> &[usize] {
        self.classes.labels()
    }

    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        features.check_width(self.dim)?;
        let scaled = self.standardizer.apply(features)?;
        Ok((0..scaled.n_rows())
            .into_par_iter()
            .map(|i| self.vote(&self.neighbors(scaled.row(i))))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_memorizes() {
        let fm = FeatureMatrix::from_rows(&[vec![0.0, 1.0], vec![3.0, 1.0], vec![5.0, -2.0]]).unwrap();
        let y = [4, 9, 4];
        let m = knn_fit(&fm, &y, 1).unwrap();
        assert_eq!(m.predict(&fm).unwrap(), y.to_vec());
    }

    #[test]
    fn k_equals_n_is_global_majority() {
        let fm = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![10.0]]).unwrap();
        let m = knn_fit(&fm, &[1, 2, 2, 1], 4).unwrap();
        // 2–2 tie: the nearest neighbour of each query decides
        let q = FeatureMatrix::from_rows(&[vec![0.1], vec![1.9], vec![9.0]]).unwrap();
        assert_eq!(m.predict(&q).unwrap(), vec![1, 2, 1]);
        let m = knn_fit(&fm, &[1, 2, 2, 2], 4).unwrap();
        assert_eq!(m.predict(&q).unwrap(), vec![2, 2, 2]);
    }

    #[test]
    fn distance_ties_admit_lowest_index() {
        let fm = FeatureMatrix::from_rows(&[vec![-1.0], vec![1.0], vec![3.0]]).unwrap();
        let m = knn_fit(&fm, &[0, 1, 1], 1).unwrap();
        // query at 0 is equidistant from rows 0 and 1
        let q = FeatureMatrix::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(m.neighbors(m.standardizer.apply(&q).unwrap().row(0))[0].1, 0);
        assert_eq!(m.predict(&q).unwrap(), vec![0]);
    }

    #[test]
    fn errors() {
        let fm = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(knn_fit(&fm, &[0, 1], 3).is_err());
        assert!(knn_fit(&fm, &[0, 1], 0).is_err());
        let m = knn_fit(&fm, &[0, 1], 1).unwrap();
        assert!(m.predict(&FeatureMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap()).is_err());
    }
}
