use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{check_training_set, tree_fit, Classifier, DecisionTreeModel, TreeParams};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::rng::{self, streams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    pub trees: Vec<DecisionTreeModel>,
    pub max_depth: usize,
    pub seed: u64,
    /// Union of the labels seen by any tree, ascending.
    pub classes: Vec<usize>,
    pub n_features: usize,
}

/// Row indices of bootstrap sample `bag`: `n` draws with replacement from the
/// stream keyed by `(seed, bag)`.
pub fn bootstrap_indices(n: usize, seed: u64, bag: usize) -> Vec<usize> {
    let mut r = rng::substream(seed, streams::BOOTSTRAP, bag as u64);
    (0..n).map(|_| r.random_range(0..n)).collect()
}

pub fn bagging_fit(
    features: &FeatureMatrix,
    labels: &[usize],
    bags: usize,
    max_depth: usize,
    seed: u64,
) -> Result<BaggingModel> {
    check_training_set(features, labels)?;
    if bags == 0 {
        return Err(Error::arg("bagging needs at least one bag"));
    }
    let n = labels.len();
    let trees = (0..bags)
        .into_par_iter()
        .map(|b| {
            let idx = bootstrap_indices(n, seed, b);
            let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            tree_fit(&features.take_rows(&idx), &y, TreeParams::new(max_depth), None)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut classes: Vec<usize> = trees.iter().flat_map(|t| t.classes().iter().copied()).collect();
    classes.sort_unstable();
    classes.dedup();
    Ok(BaggingModel {
        trees,
        max_depth,
        seed,
        classes,
        n_features: features.n_features(),
    })
}

impl Classifier for BaggingModel {
    fn classes(&self) -> &[usize] {
        &self.classes
    }

    /// Plurality vote of the trees; ties go to the lowest label.
    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        features.check_width(self.n_features)?;
        let mut votes = vec![0usize; self.classes.len()];
        Ok(features
            .rows()
            .map(|row| {
                votes.iter_mut().for_each(|v| *v = 0);
                for t in &self.trees {
                    let label = t.predict_row(row);
                    votes[self.classes.binary_search(&label).expect("known label")] += 1;
                }
                let mut best = 0;
                for (c, &v) in votes.iter().enumerate() {
                    if v > votes[best] {
                        best = c;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}
