//! Base learners behind a common prediction contract.
//!
//! Every learner maps the labels it saw during fitting onto dense indices
//! (see [`Classes`]) and only ever predicts one of those labels. Ties between
//! classes always resolve to the lowest class id.

pub mod knn;
pub mod logreg;
pub mod naive_bayes;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use knn::{knn_fit, KnnModel};
pub use logreg::{logreg_fit, LogRegParams, LogisticRegressionModel};
pub use naive_bayes::{nb_fit, NaiveBayesModel};
pub use tree::{tree_fit, Criterion, DecisionTreeModel, TreeParams};

pub trait Classifier {
    /// Labels seen during fitting, ascending.
    fn classes(&self) -> &[usize];

    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>>;
}

/// Learners that produce class posteriors. Columns follow [`Classifier::classes`].
pub trait ProbabilisticClassifier: Classifier {
    fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<Vec<f64>>>;
}

/// Sorted distinct labels; a label's position is its dense class index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Classes(Vec<usize>);

impl Classes {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut v = labels.to_vec();
        v.sort_unstable();
        v.dedup();
        Classes(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn label(&self, index: usize) -> usize {
        self.0[index]
    }

    pub fn index_of(&self, label: usize) -> Option<usize> {
        self.0.binary_search(&label).ok()
    }

    /// Dense indices of `labels`, which must all be known.
    pub fn encode(&self, labels: &[usize]) -> Vec<usize> {
        labels
            .iter()
            .map(|&l| self.index_of(l).expect("label seen during fit"))
            .collect()
    }
}

/// Index of the largest score; the first one wins ties.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_training_set(features: &FeatureMatrix, labels: &[usize]) -> Result<()> {
    if features.n_rows() == 0 {
        return Err(Error::arg("cannot fit on an empty training set"));
    }
    if features.n_rows() != labels.len() {
        return Err(Error::arg(format!(
            "{} feature rows but {} labels",
            features.n_rows(),
            labels.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_weights(weights: Option<&[f64]>, n: usize) -> Result<()> {
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::arg(format!("{} sample weights for {n} rows", w.len())));
        }
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::arg("sample weights must be finite and non-negative"));
        }
    }
    Ok(())
}
