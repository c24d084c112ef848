//! Multiclass AdaBoost (SAMME) over weight-aware decision trees.
//!
//! Round weight: `α = ln((1 − ε) / ε) + ln(K − 1)`. A learner must beat
//! random guessing, `ε < 1 − 1/K`; for K = 2 this is classic AdaBoost.

use serde::{Deserialize, Serialize};

use crate::classifiers::{
    check_training_set, tree_fit, Classes, Classifier, DecisionTreeModel, TreeParams,
};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Ratio standing in for `(1 − ε)/ε` when a round makes no weighted error.
pub const PERFECT_ROUND_ODDS: f64 = 1e9;

/// SAMME round weight for weighted error `error` over `k` classes.
pub fn samme_alpha(error: f64, k: usize) -> f64 {
    let odds = if error <= 0.0 {
        PERFECT_ROUND_ODDS
    } else {
        (1.0 - error) / error
    };
    odds.ln() + ((k - 1) as f64).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub learner: DecisionTreeModel,
    pub alpha: f64,
    /// Weighted training error under the distribution the learner was fit on.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub rounds: Vec<BoostRound>,
    /// Requested round count; fewer are stored when boosting stops early.
    pub max_rounds: usize,
    pub max_depth: usize,
    pub classes: Classes,
    pub n_features: usize,
    pub seed: u64,
}

/// What a fit reports after each accepted round.
#[derive(Clone, Debug)]
pub struct RoundTrace<'a> {
    pub round: usize,
    pub error: f64,
    pub alpha: f64,
    /// Whether the round's learner misclassified each training row.
    pub missed: &'a [bool],
    /// Sample weights after the update and renormalization.
    pub weights: &'a [f64],
}

pub fn adaboost_fit(
    features: &FeatureMatrix,
    labels: &[usize],
    rounds: usize,
    max_depth: usize,
    seed: u64,
) -> Result<AdaBoostModel> {
    adaboost_fit_traced(features, labels, rounds, max_depth, seed, &mut |_| {})
}

pub fn adaboost_fit_traced(
    features: &FeatureMatrix,
    labels: &[usize],
    rounds: usize,
    max_depth: usize,
    seed: u64,
    on_round: &mut dyn FnMut(&RoundTrace<'_>),
) -> Result<AdaBoostModel> {
    check_training_set(features, labels)?;
    if rounds == 0 {
        return Err(Error::arg("AdaBoost needs at least one round"));
    }
    let classes = Classes::from_labels(labels);
    let k = classes.len();
    if k < 2 {
        return Err(Error::arg("AdaBoost needs at least two classes"));
    }
    let bound = 1.0 - 1.0 / k as f64;
    let n = labels.len();
    let mut weights = vec![1.0 / n as f64; n];
    let mut stored = Vec::with_capacity(rounds);
    let mut missed = vec![false; n];

    for t in 0..rounds {
        let learner = tree_fit(features, labels, TreeParams::new(max_depth), Some(&weights))?;
        let mut error = 0.0;
        for (i, row) in features.rows().enumerate() {
            missed[i] = learner.predict_row(row) != labels[i];
            if missed[i] {
                error += weights[i];
            }
        }
        if error >= bound {
            if t == 0 {
                return Err(Error::Unboostable { error, bound });
            }
            break;
        }
        let alpha = samme_alpha(error, k);
        stored.push(BoostRound {
            learner,
            alpha,
            error,
        });
        if error <= 0.0 {
            on_round(&RoundTrace {
                round: t,
                error,
                alpha,
                missed: &missed,
                weights: &weights,
            });
            break;
        }
        let boost = alpha.exp();
        for (w, &m) in weights.iter_mut().zip(&missed) {
            if m {
                *w *= boost;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        on_round(&RoundTrace {
            round: t,
            error,
            alpha,
            missed: &missed,
            weights: &weights,
        });
    }

    Ok(AdaBoostModel {
        rounds: stored,
        max_rounds: rounds,
        max_depth,
        classes,
        n_features: features.n_features(),
        seed,
    })
}

impl Classifier for AdaBoostModel {
    fn classes(&self) -> &[usize] {
        self.classes.labels()
    }

    /// `argmax_c Σ_t α_t·[h_t(x) = c]`; ties go to the lowest label.
    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        features.check_width(self.n_features)?;
        if self.rounds.is_empty() {
            return Err(Error::arg("AdaBoost model has no rounds"));
        }
        let mut score = vec![0.0; self.classes.len()];
        Ok(features
            .rows()
            .map(|row| {
                score.iter_mut().for_each(|s| *s = 0.0);
                for r in &self.rounds {
                    let c = self.classes.index_of(r.learner.predict_row(row)).expect("known label");
                    score[c] += r.alpha;
                }
                self.classes.label(crate::classifiers::argmax(&score))
            })
            .collect())
    }
}
