//! Hybrid naive Bayes: Gaussian likelihoods for continuous features,
//! Laplace-smoothed frequency tables for categorical ones.

use serde::{Deserialize, Serialize};

use super::{argmax, check_training_set, Classes, Classifier, ProbabilisticClassifier};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureMatrix};

pub const VARIANCE_FLOOR: f64 = 1e-9;
pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureLikelihood {
    Gaussian {
        /// Per class.
        means: Vec<f64>,
        /// Per class, population convention, floored at [`VARIANCE_FLOOR`].
        variances: Vec<f64>,
    },
    Categorical {
        /// Distinct training values, ascending.
        values: Vec<f64>,
        /// `log_probs[class][value]`.
        log_probs: Vec<Vec<f64>>,
        /// Per class, for values never seen in training.
        log_unseen: Vec<f64>,
    },
}

impl FeatureLikelihood {
    fn log_likelihood(&self, class: usize, x: f64) -> f64 {
        match self {
            FeatureLikelihood::Gaussian { means, variances } => {
                let var = variances[class];
                let diff = x - means[class];
                -0.5 * (2.0 * std::f64::consts::PI * var).ln() - diff * diff / (2.0 * var)
            }
            FeatureLikelihood::Categorical {
                values,
                log_probs,
                log_unseen,
            } => match values.binary_search_by(|v| v.total_cmp(&x)) {
                Ok(v) => log_probs[class][v],
                Err(_) => log_unseen[class],
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub classes: Classes,
    pub log_priors: Vec<f64>,
    pub alpha: f64,
    pub features: Vec<FeatureLikelihood>,
}

/// Fit class priors and per-feature likelihoods. Categorical frequencies are
/// `(count + α) / (class count + α·V)` with `V` the number of distinct
/// training values of that feature.
pub fn nb_fit(features: &FeatureMatrix, labels: &[usize], alpha: f64) -> Result<NaiveBayesModel> {
    check_training_set(features, labels)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::arg(format!("smoothing α must be positive, got {alpha}")));
    }
    let classes = Classes::from_labels(labels);
    let y = classes.encode(labels);
    let k = classes.len();
    let n = labels.len() as f64;
    let mut class_counts = vec![0usize; k];
    for &c in &y {
        class_counts[c] += 1;
    }
    let log_priors = class_counts.iter().map(|&c| (c as f64 / n).ln()).collect();

    let likelihoods = (0..features.n_features())
        .map(|j| {
            let col = features.column(j);
            match features.kinds()[j] {
                FeatureKind::Continuous => gaussian(&col, &y, &class_counts),
                FeatureKind::Categorical => categorical(&col, &y, &class_counts, alpha),
            }
        })
        .collect();

    Ok(NaiveBayesModel {
        classes,
        log_priors,
        alpha,
        features: likelihoods,
    })
}

fn gaussian(col: &[f64], y: &[usize], class_counts: &[usize]) -> FeatureLikelihood {
    let k = class_counts.len();
    let mut means = vec![0.0; k];
    for (&x, &c) in col.iter().zip(y) {
        means[c] += x;
    }
    for (m, &n) in means.iter_mut().zip(class_counts) {
        *m /= n as f64;
    }
    let mut variances = vec![0.0; k];
    for (&x, &c) in col.iter().zip(y) {
        variances[c] += (x - means[c]) * (x - means[c]);
    }
    for (v, &n) in variances.iter_mut().zip(class_counts) {
        *v = (*v / n as f64).max(VARIANCE_FLOOR);
    }
    FeatureLikelihood::Gaussian { means, variances }
}

fn categorical(col: &[f64], y: &[usize], class_counts: &[usize], alpha: f64) -> FeatureLikelihood {
    let mut values = col.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let v = values.len() as f64;
    let mut counts = vec![vec![0usize; values.len()]; class_counts.len()];
    for (&x, &c) in col.iter().zip(y) {
        let idx = values
            .binary_search_by(|probe| probe.total_cmp(&x))
            .expect("value collected above");
        counts[c][idx] += 1;
    }
    let log_probs = counts
        .iter()
        .zip(class_counts)
        .map(|(row, &nc)| {
            let denom = (nc as f64 + alpha * v).ln();
            row.iter().map(|&cnt| (cnt as f64 + alpha).ln() - denom).collect()
        })
        .collect();
    let log_unseen = class_counts
        .iter()
        .map(|&nc| alpha.ln() - (nc as f64 + alpha * v).ln())
        .collect();
    FeatureLikelihood::Categorical {
        values,
        log_probs,
        log_unseen,
    }
}

impl NaiveBayesModel {
    fn joint_log_likelihood(&self, row: &[f64]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| {
                self.log_priors[c]
                    + self
                        .features
                        .iter()
                        .zip(row)
                        .map(|(f, &x)| f.log_likelihood(c, x))
                        .sum::<f64>()
            })
            .collect()
    }
}

impl Classifier for NaiveBayesModel {
    fn classes(&self) -> &[usize] {
        self.classes.labels()
    }

    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        features.check_width(self.features.len())?;
        Ok(features
            .rows()
            .map(|r| self.classes.label(argmax(&self.joint_log_likelihood(r))))
            .collect())
    }
}

impl ProbabilisticClassifier for NaiveBayesModel {
    fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        features.check_width(self.features.len())?;
        Ok(features
            .rows()
            .map(|r| {
                let jll = self.joint_log_likelihood(r);
                let max = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let exp: Vec<f64> = jll.iter().map(|l| (l - max).exp()).collect();
                let total: f64 = exp.iter().sum();
                exp.into_iter().map(|e| e / total).collect()
            })
            .collect())
    }
}
