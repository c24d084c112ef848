use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// Assignment of `n` rows to `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold of each row, in `[0, k)`.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

/// Shuffle the rows, then deal them round-robin into `k` folds, so fold sizes
/// differ by at most one and the first `n mod k` folds hold the extra row.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::arg(format!("need 2 ≤ folds ≤ rows, got {k} folds for {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::substream(seed, streams::FOLDS, 0));
    let mut assignments = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        assignments[row] = pos % k;
    }
    Ok(FoldPlan { k, assignments, seed })
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    /// Rows of fold `fold`, ascending.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.assignments[i] == fold).collect()
    }

    /// Rows outside fold `fold`, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified train/test split: each class sends `round(count · test_fraction)`
/// of its rows, chosen at random, to the test side. Both index lists ascend.
pub fn stratified_split(
    labels: &[usize],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::arg(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    let mut rng = rng::substream(seed, streams::HOLDOUT, 0);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for rows in by_class.values_mut() {
        rows.shuffle(&mut rng);
        let take = (rows.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&rows[..take]);
        train.extend_from_slice(&rows[take..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::arg(format!(
            "a {test_fraction} holdout of {} rows leaves an empty side",
            labels.len()
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
