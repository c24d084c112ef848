//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Weights form a `K × (d + 1)` row-major matrix, one row per class; the last
//! entry of each row is the bias, which the L2 penalty leaves out.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, check_training_set, Classes, Classifier, ProbabilisticClassifier};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.5,
            epochs: 200,
            l2: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegressionModel {
    pub classes: Classes,
    pub dim: usize,
    /// `K × (dim + 1)`, row-major; entry `c·(dim + 1) + dim` is the bias of class `c`.
    pub weights: Vec<f64>,
    pub params: LogRegParams,
    /// Objective at the start of each epoch.
    pub loss_trace: Vec<f64>,
}

const CHUNK: usize = 256;

/// Softmax of `logits` in place.
fn softmax(logits: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    logits.iter_mut().for_each(|l| *l /= total);
}

fn logits_into(row: &[f64], weights: &[f64], out: &mut [f64]) {
    let stride = row.len() + 1;
    for (c, o) in out.iter_mut().enumerate() {
        let w = &weights[c * stride..(c + 1) * stride];
        *o = w[row.len()] + dot(&w[..row.len()], row);
    }
}

/// Four independent accumulators, so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// L2-regularized mean cross-entropy and its gradient with respect to `weights`.
///
/// `classes` are dense class indices in `0..k`; `weights` is laid out as in
/// [`LogisticRegressionModel::weights`].
pub fn loss_and_gradient(
    features: &FeatureMatrix,
    classes: &[usize],
    k: usize,
    weights: &[f64],
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = features.n_rows();
    let d = features.n_features();
    let stride = d + 1;
    // Fixed chunk boundaries and an in-order reduction keep results
    // independent of the thread count.
    let partials: Vec<(f64, Vec<f64>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut loss = 0.0;
            let mut grad = vec![0.0; stride * k];
            let mut p = vec![0.0; k];
            let (lo, hi) = (c * CHUNK, ((c + 1) * CHUNK).min(n));
            for (i, &y) in (lo..hi).zip(&classes[lo..hi]) {
                let row = features.row(i);
                logits_into(row, weights, &mut p);
                softmax(&mut p);
                loss -= p[y].max(f64::MIN_POSITIVE).ln();
                p[y] -= 1.0;
                for (class, &r) in p.iter().enumerate() {
                    let g = &mut grad[class * stride..(class + 1) * stride];
                    for (gj, &x) in g[..d].iter_mut().zip(row) {
                        *gj += r * x;
                    }
                    g[d] += r;
                }
            }
            (loss, grad)
        })
        .collect();

    let mut loss = 0.0;
    let mut grad = vec![0.0; stride * k];
    for (l, g) in partials {
        loss += l;
        grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
    }
    let n = n as f64;
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    let mut penalty = 0.0;
    for c in 0..k {
        let span = c * stride..c * stride + d;
        for (g, w) in grad[span.clone()].iter_mut().zip(&weights[span]) {
            *g += l2 * w;
            penalty += w * w;
        }
    }
    (loss + 0.5 * l2 * penalty, grad)
}

pub fn logreg_fit(
    features: &FeatureMatrix,
    labels: &[usize],
    params: LogRegParams,
) -> Result<LogisticRegressionModel> {
    check_training_set(features, labels)?;
    if !(params.learning_rate.is_finite() && params.learning_rate > 0.0) {
        return Err(Error::arg("learning rate must be positive"));
    }
    if params.epochs == 0 {
        return Err(Error::arg("epochs must be ≥ 1"));
    }
    if !(params.l2.is_finite() && params.l2 >= 0.0) {
        return Err(Error::arg("L2 strength must be ≥ 0"));
    }
    let classes = Classes::from_labels(labels);
    let y = classes.encode(labels);
    let k = classes.len();
    let d = features.n_features();
    let mut weights = vec![0.0; (d + 1) * k];
    let mut loss_trace = Vec::with_capacity(params.epochs);
    for _ in 0..params.epochs {
        let (loss, grad) = loss_and_gradient(features, &y, k, &weights, params.l2);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence {
                learning_rate: params.learning_rate,
            });
        }
        loss_trace.push(loss);
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= params.learning_rate * g;
        }
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Divergence {
            learning_rate: params.learning_rate,
        });
    }
    Ok(LogisticRegressionModel {
        classes,
        dim: d,
        weights,
        params,
        loss_trace,
    })
}

impl LogisticRegressionModel {
    fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.classes.len()];
        logits_into(row, &self.weights, &mut p);
        softmax(&mut p);
        p
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

impl Classifier for LogisticRegressionModel {
    fn classes(&self) -> &[usize] {
        self.classes.labels()
    }

    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        features.check_width(self.dim)?;
        Ok(features
            .rows()
            .map(|r| self.classes.label(argmax(&self.probabilities(r))))
            .collect())
    }
}

impl ProbabilisticClassifier for LogisticRegressionModel {
    fn predict_proba(&self, features: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        features.check_width(self.dim)?;
        Ok(features.rows().map(|r| self.probabilities(r)).collect())
    }
}
