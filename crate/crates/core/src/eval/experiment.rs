//! Experiment cells, cross-validation and the experiment matrix.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{make_folds, stratified_split};
use super::metrics::accuracy;
use crate::classifiers::{knn_fit, logreg_fit, nb_fit, tree_fit, Criterion, LogRegParams, TreeParams};
use crate::coarsen::LabelCoarsener;
use crate::data::schema::is_latent_name;
use crate::data::sample_indices;
use crate::ensembles::{adaboost_fit, bagging_fit};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Standardizer};
use crate::model::{ClassifierModel, TrainedModel};

fn default_alpha() -> f64 {
    crate::classifiers::naive_bayes::DEFAULT_ALPHA
}
fn default_min_leaf() -> usize {
    1
}
fn default_learning_rate() -> f64 {
    LogRegParams::default().learning_rate
}
fn default_epochs() -> usize {
    LogRegParams::default().epochs
}
fn default_l2() -> f64 {
    LogRegParams::default().l2
}
fn yes() -> bool {
    true
}

/// Learning algorithm and its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Algorithm {
    NaiveBayes {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    LogisticRegression {
        #[serde(default = "default_learning_rate")]
        learning_rate: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default = "default_l2")]
        l2: f64,
    },
    DecisionTree {
        max_depth: usize,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
        #[serde(default)]
        criterion: Criterion,
    },
    Knn {
        k: usize,
    },
    Bagging {
        max_depth: usize,
        bags: usize,
    },
    #[serde(rename = "adaboost")]
    AdaBoost {
        max_depth: usize,
        rounds: usize,
    },
}

impl Algorithm {
    pub fn naive_bayes() -> Self {
        Algorithm::NaiveBayes { alpha: default_alpha() }
    }

    pub fn logistic_regression() -> Self {
        let p = LogRegParams::default();
        Algorithm::LogisticRegression {
            learning_rate: p.learning_rate,
            epochs: p.epochs,
            l2: p.l2,
        }
    }

    pub fn decision_tree(max_depth: usize) -> Self {
        Algorithm::DecisionTree {
            max_depth,
            min_leaf: 1,
            criterion: Criterion::Entropy,
        }
    }

    /// Position in report order.
    fn rank(&self) -> usize {
        match self {
            Algorithm::NaiveBayes { .. } => 0,
            Algorithm::LogisticRegression { .. } => 1,
            Algorithm::DecisionTree { .. } => 2,
            Algorithm::Knn { .. } => 3,
            Algorithm::Bagging { .. } => 4,
            Algorithm::AdaBoost { .. } => 5,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::NaiveBayes { .. } => "naive_bayes",
            Algorithm::LogisticRegression { .. } => "logistic_regression",
            Algorithm::DecisionTree { .. } => "decision_tree",
            Algorithm::Knn { .. } => "knn",
            Algorithm::Bagging { .. } => "bagging",
            Algorithm::AdaBoost { .. } => "adaboost",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Algorithm::NaiveBayes { .. } => "Naive Bayes",
            Algorithm::LogisticRegression { .. } => "Multinomial Logistic Regression",
            Algorithm::DecisionTree { .. } => "Decision Tree",
            Algorithm::Knn { .. } => "K-Nearest Neighbors",
            Algorithm::Bagging { .. } => "Bagging",
            Algorithm::AdaBoost { .. } => "AdaBoost",
        }
    }

    /// Hyperparameters as (column heading, value) pairs, in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match *self {
            Algorithm::NaiveBayes { alpha } => vec![("Alpha", alpha.to_string())],
            Algorithm::LogisticRegression {
                learning_rate,
                epochs,
                l2,
            } => vec![
                ("Learning Rate", learning_rate.to_string()),
                ("Epochs", epochs.to_string()),
                ("L2", l2.to_string()),
            ],
            Algorithm::DecisionTree {
                max_depth,
                min_leaf,
                criterion,
            } => vec![
                ("Tree Depth", max_depth.to_string()),
                ("Min Leaf", min_leaf.to_string()),
                (
                    "Criterion",
                    match criterion {
                        Criterion::Entropy => "entropy",
                        Criterion::Gini => "gini",
                    }
                    .to_string(),
                ),
            ],
            Algorithm::Knn { k } => vec![("K-value", k.to_string())],
            Algorithm::Bagging { max_depth, bags } => vec![
                ("Tree Depth", max_depth.to_string()),
                ("Number of Bags", bags.to_string()),
            ],
            Algorithm::AdaBoost { max_depth, rounds } => vec![
                ("Tree Depth", max_depth.to_string()),
                ("Rounds", rounds.to_string()),
            ],
        }
    }

    fn sort_key(&self) -> Vec<f64> {
        match *self {
            Algorithm::NaiveBayes { alpha } => vec![alpha],
            Algorithm::LogisticRegression {
                learning_rate,
                epochs,
                l2,
            } => vec![learning_rate, epochs as f64, l2],
            Algorithm::DecisionTree {
                max_depth,
                min_leaf,
                criterion,
            } => vec![max_depth as f64, min_leaf as f64, f64::from(criterion == Criterion::Gini)],
            Algorithm::Knn { k } => vec![k as f64],
            Algorithm::Bagging { max_depth, bags } => vec![max_depth as f64, bags as f64],
            Algorithm::AdaBoost { max_depth, rounds } => vec![max_depth as f64, rounds as f64],
        }
    }

    fn validate(&self, problems: &mut Vec<String>) {
        match *self {
            Algorithm::NaiveBayes { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    problems.push(format!("naive_bayes.alpha must be > 0, got {alpha}"));
                }
            }
            Algorithm::LogisticRegression {
                learning_rate,
                epochs,
                l2,
            } => {
                if !(learning_rate > 0.0 && learning_rate.is_finite()) {
                    problems.push(format!("logistic_regression.learning_rate must be > 0, got {learning_rate}"));
                }
                if epochs == 0 {
                    problems.push("logistic_regression.epochs must be ≥ 1".into());
                }
                if !(l2 >= 0.0 && l2.is_finite()) {
                    problems.push(format!("logistic_regression.l2 must be ≥ 0, got {l2}"));
                }
            }
            Algorithm::DecisionTree { max_depth, min_leaf, .. } => {
                if max_depth == 0 {
                    problems.push("decision_tree.max_depth must be ≥ 1".into());
                }
                if min_leaf == 0 {
                    problems.push("decision_tree.min_leaf must be ≥ 1".into());
                }
            }
            Algorithm::Knn { k } => {
                if k == 0 {
                    problems.push("knn.k must be ≥ 1".into());
                }
            }
            Algorithm::Bagging { max_depth, bags } => {
                if max_depth == 0 {
                    problems.push("bagging.max_depth must be ≥ 1".into());
                }
                if bags == 0 {
                    problems.push("bagging.bags must be ≥ 1".into());
                }
            }
            Algorithm::AdaBoost { max_depth, rounds } => {
                if max_depth == 0 {
                    problems.push("adaboost.max_depth must be ≥ 1".into());
                }
                if rounds == 0 {
                    problems.push("adaboost.rounds must be ≥ 1".into());
                }
            }
        }
    }

    fn fit(&self, features: &FeatureMatrix, labels: &[usize], seed: u64) -> Result<ClassifierModel> {
        Ok(match *self {
            Algorithm::NaiveBayes { alpha } => ClassifierModel::NaiveBayes(nb_fit(features, labels, alpha)?),
            Algorithm::LogisticRegression {
                learning_rate,
                epochs,
                l2,
            } => ClassifierModel::LogisticRegression(logreg_fit(
                features,
                labels,
                LogRegParams {
                    learning_rate,
                    epochs,
                    l2,
                    seed,
                },
            )?),
            Algorithm::DecisionTree {
                max_depth,
                min_leaf,
                criterion,
            } => ClassifierModel::DecisionTree(tree_fit(
                features,
                labels,
                TreeParams {
                    max_depth,
                    min_leaf,
                    criterion,
                },
                None,
            )?),
            Algorithm::Knn { k } => ClassifierModel::Knn(knn_fit(features, labels, k)?),
            Algorithm::Bagging { max_depth, bags } => {
                ClassifierModel::Bagging(bagging_fit(features, labels, bags, max_depth, seed)?)
            }
            Algorithm::AdaBoost { max_depth, rounds } => {
                ClassifierModel::AdaBoost(adaboost_fit(features, labels, rounds, max_depth, seed)?)
            }
        })
    }
}

/// How a cell is scored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Protocol {
    CrossValidation { folds: usize },
    /// Stratified on the original labels.
    Holdout { test_fraction: f64 },
}

impl Protocol {
    pub fn label(&self) -> String {
        match *self {
            Protocol::CrossValidation { folds } => format!("{folds}-fold CV"),
            Protocol::Holdout { test_fraction } => format!("{}% holdout", test_fraction * 100.0),
        }
    }

    fn sort_key(&self) -> (usize, f64) {
        match *self {
            Protocol::CrossValidation { folds } => (0, folds as f64),
            Protocol::Holdout { test_fraction } => (1, test_fraction),
        }
    }

    /// Number of accuracy scores the protocol produces.
    pub fn n_scores(&self) -> usize {
        match *self {
            Protocol::CrossValidation { folds } => folds,
            Protocol::Holdout { .. } => 1,
        }
    }
}

pub const DEFAULT_HOLDOUT: Protocol = Protocol::Holdout { test_fraction: 0.2 };

/// One experiment cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// k-means cluster count for label coarsening; `None` keeps the original
    /// hotel clusters.
    pub coarsening: Option<usize>,
    pub protocol: Protocol,
    /// Cap on the number of rows used, drawn uniformly at random.
    #[serde(default)]
    pub sample: Option<usize>,
    /// Keep the destination latent features `d1..d149`.
    #[serde(default = "yes")]
    pub use_destinations: bool,
    /// Z-score features with training-side statistics before fitting.
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, coarsening: Option<usize>, protocol: Protocol, seed: u64) -> Self {
        ExperimentConfig {
            algorithm,
            coarsening,
            protocol,
            sample: None,
            use_destinations: true,
            standardize: true,
            seed,
        }
    }

    /// Every violated precondition, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.algorithm.validate(&mut out);
        if self.coarsening == Some(0) {
            out.push("coarsening must be ≥ 1".into());
        }
        match self.protocol {
            Protocol::CrossValidation { folds } if folds < 2 => {
                out.push(format!("cross-validation needs ≥ 2 folds, got {folds}"));
            }
            Protocol::Holdout { test_fraction } if !(test_fraction > 0.0 && test_fraction < 1.0) => {
                out.push(format!("holdout test_fraction must lie in (0, 1), got {test_fraction}"));
            }
            _ => {}
        }
        if self.sample == Some(0) {
            out.push("sample must be ≥ 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::arg(p.join("; ")))
        }
    }

    /// Display form of the coarsening level.
    pub fn cluster_label(&self) -> String {
        self.coarsening.map_or_else(|| "raw".to_string(), |k| k.to_string())
    }

    fn compare(&self, other: &Self) -> Ordering {
        let cmp_f64s = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(a.len().cmp(&b.len()))
        };
        let (pa, pb) = (self.protocol.sort_key(), other.protocol.sort_key());
        self.algorithm
            .rank()
            .cmp(&other.algorithm.rank())
            .then(self.coarsening.unwrap_or(usize::MAX).cmp(&other.coarsening.unwrap_or(usize::MAX)))
            .then_with(|| cmp_f64s(&self.algorithm.sort_key(), &other.algorithm.sort_key()))
            .then(pa.0.cmp(&pb.0))
            .then(pa.1.total_cmp(&pb.1))
            .then(self.sample.unwrap_or(usize::MAX).cmp(&other.sample.unwrap_or(usize::MAX)))
            .then(other.use_destinations.cmp(&self.use_destinations))
            .then(other.standardize.cmp(&self.standardize))
            .then(self.seed.cmp(&other.seed))
    }

    /// Rows the cell works on: all of them, or a seeded uniform sample.
    pub fn select_rows(&self, features: &FeatureMatrix, labels: &[usize]) -> Result<(FeatureMatrix, Vec<usize>)> {
        match self.sample {
            Some(m) if m < features.n_rows() => {
                let idx = sample_indices(features.n_rows(), m, self.seed)?;
                Ok((features.take_rows(&idx), idx.iter().map(|&i| labels[i]).collect()))
            }
            _ => Ok((features.clone(), labels.to_vec())),
        }
    }
}

/// Fit the full cell pipeline (feature selection, coarsening,
/// standardization, classifier) on the given rows.
pub fn fit_cell(config: &ExperimentConfig, raw: &FeatureMatrix, raw_labels: &[usize]) -> Result<TrainedModel> {
    config.validate()?;
    if raw.n_rows() != raw_labels.len() {
        return Err(Error::arg(format!(
            "{} feature rows but {} labels",
            raw.n_rows(),
            raw_labels.len()
        )));
    }
    let x = if config.use_destinations {
        raw.clone()
    } else {
        raw.select_features(|name| !is_latent_name(name))
    };
    let (coarsener, targets) = match config.coarsening {
        Some(k) => {
            let (c, labels) = LabelCoarsener::fit(&x, k, config.seed)?;
            (Some(c), labels)
        }
        None => (None, raw_labels.to_vec()),
    };
    let (standardizer, x) = if config.standardize {
        let s = Standardizer::fit(&x);
        let scaled = s.apply(&x)?;
        (Some(s), scaled)
    } else {
        (None, x)
    };
    let classifier = config.algorithm.fit(&x, &targets, config.seed)?;
    Ok(TrainedModel {
        feature_names: x.names().to_vec(),
        coarsener,
        standardizer,
        classifier,
    })
}

/// Accuracy of a model fitted on `train` rows and scored on `test` rows.
fn score_split(
    config: &ExperimentConfig,
    raw: &FeatureMatrix,
    labels: &[usize],
    train: &[usize],
    test: &[usize],
) -> Result<f64> {
    let pick = |rows: &[usize]| -> (FeatureMatrix, Vec<usize>) {
        (raw.take_rows(rows), rows.iter().map(|&i| labels[i]).collect())
    };
    let (x_train, y_train) = pick(train);
    let (x_test, y_test) = pick(test);
    let model = fit_cell(config, &x_train, &y_train)?;
    let x_test = model.select(&x_test)?;
    let truth = model.targets(&x_test, &y_test)?;
    accuracy(&model.predict(&x_test)?, &truth)
}

/// Result of one cell. Failed cells carry the error text and no scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub config: ExperimentConfig,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

impl CellResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Score one cell under its protocol. For cross-validation every fold fits
/// coarsening, standardization and the classifier on the other folds only;
/// errors carry the fold index.
pub fn cross_validate(config: &ExperimentConfig, raw: &FeatureMatrix, labels: &[usize]) -> Result<CellResult> {
    let started = Instant::now();
    config.validate()?;
    if raw.n_rows() != labels.len() {
        return Err(Error::arg(format!("{} feature rows but {} labels", raw.n_rows(), labels.len())));
    }
    if raw.n_rows() == 0 {
        return Err(Error::arg("no rows to evaluate"));
    }
    let (raw, labels) = config.select_rows(raw, labels)?;
    let fold_accuracies = match config.protocol {
        Protocol::CrossValidation { folds } => {
            let plan = make_folds(raw.n_rows(), folds, config.seed)?;
            (0..folds)
                .map(|f| {
                    score_split(config, &raw, &labels, &plan.train_rows(f), &plan.test_rows(f)).map_err(|e| {
                        Error::Fold {
                            fold: f,
                            source: Box::new(e),
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        Protocol::Holdout { test_fraction } => {
            let (train, test) = stratified_split(&labels, test_fraction, config.seed)?;
            vec![score_split(config, &raw, &labels, &train, &test)?]
        }
    };
    let mean = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CellResult {
        config: config.clone(),
        fold_accuracies,
        mean_accuracy: Some(mean),
        seconds: started.elapsed().as_secs_f64(),
        error: None,
    })
}

/// Accuracy rows for a grid of cells.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<CellResult>,
}

/// Run every cell on up to `workers` threads (0 = rayon's default). A failing
/// cell becomes a failed row; rows are sorted by algorithm, coarsening level,
/// hyperparameters and protocol.
pub fn run_experiment_matrix(
    grid: &[ExperimentConfig],
    raw: &FeatureMatrix,
    labels: &[usize],
    workers: usize,
) -> Result<MetricsReport> {
    if grid.is_empty() {
        return Err(Error::arg("empty experiment grid"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::arg(format!("thread pool: {e}")))?;
    let mut rows: Vec<CellResult> = pool.install(|| {
        grid.par_iter()
            .map(|cell| {
                let started = Instant::now();
                cross_validate(cell, raw, labels).unwrap_or_else(|e| CellResult {
                    config: cell.clone(),
                    fold_accuracies: Vec::new(),
                    mean_accuracy: None,
                    seconds: started.elapsed().as_secs_f64(),
                    error: Some(e.to_string()),
                })
            })
            .collect()
    });
    rows.sort_by(|a, b| a.config.compare(&b.config));
    Ok(MetricsReport { rows })
}

fn percent(a: f64) -> String {
    format!("{:.2}%", a * 100.0)
}

impl MetricsReport {
    /// One CSV row per cell. Contains no timings, so identical runs give
    /// identical bytes.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "algorithm",
            "params",
            "coarsening",
            "protocol",
            "sample",
            "use_destinations",
            "standardize",
            "seed",
            "status",
            "mean_accuracy",
            "fold_accuracies",
            "error",
        ])?;
        for r in &self.rows {
            let c = &r.config;
            let params: Vec<String> = c.algorithm.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([
                c.algorithm.id().to_string(),
                params.join(";"),
                c.cluster_label(),
                c.protocol.label(),
                c.sample.map_or_else(String::new, |s| s.to_string()),
                c.use_destinations.to_string(),
                c.standardize.to_string(),
                c.seed.to_string(),
                if r.is_ok() { "ok" } else { "failed" }.to_string(),
                r.mean_accuracy.map_or_else(String::new, |a| a.to_string()),
                r.fold_accuracies.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<report>", e))
    }

    /// Wall-clock seconds per cell, in report order.
    pub fn write_timings_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["algorithm", "params", "coarsening", "protocol", "seconds"])?;
        for r in &self.rows {
            let c = &r.config;
            let params: Vec<String> = c.algorithm.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([
                c.algorithm.id().to_string(),
                params.join(";"),
                c.cluster_label(),
                c.protocol.label(),
                format!("{:.3}", r.seconds),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<timings>", e))
    }

    /// Plain-text tables, one block per algorithm, with the cluster size,
    /// hyperparameters, protocol and accuracy of each cell.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut start = 0;
        while start < self.rows.len() {
            let rank = self.rows[start].config.algorithm.rank();
            let end = start
                + self.rows[start..]
                    .iter()
                    .take_while(|r| r.config.algorithm.rank() == rank)
                    .count();
            let block = &self.rows[start..end];
            let first = &block[0].config.algorithm;
            let mut header = vec!["Cluster Size".to_string()];
            header.extend(first.params().into_iter().map(|(k, _)| k.to_string()));
            header.extend(["Protocol".to_string(), "Accuracy".to_string()]);
            let mut table = vec![header];
            for r in block {
                let mut line = vec![r.config.cluster_label()];
                line.extend(r.config.algorithm.params().into_iter().map(|(_, v)| v));
                line.push(r.config.protocol.label());
                line.push(match (&r.error, r.mean_accuracy) {
                    (Some(e), _) => format!("FAILED: {e}"),
                    (None, Some(a)) => percent(a),
                    (None, None) => String::new(),
                });
                table.push(line);
            }
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "{}", first.title());
            let widths: Vec<usize> = (0..table[0].len())
                .map(|j| table.iter().map(|row| row[j].chars().count()).max().unwrap_or(0))
                .collect();
            for row in &table {
                let cells: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(cell, &w)| format!("{cell:<w$}"))
                    .collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
            start = end;
        }
        out
    }
}

/// Preset experiment grids, one per accuracy table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TablePreset {
    /// Naive Bayes over every coarsening level.
    Table3,
    /// Logistic regression, 5- and 10-fold CV, every coarsening level.
    Table4,
    /// Decision trees of depth 3, 5, 10 at 5 and 10 clusters.
    Table5,
    /// k-NN with k = 10, 20 on sampled rows and the original labels.
    Table6,
    /// Bagging (depth 5/10 × 5/10 bags) and AdaBoost (depth 3 × 10/20/40
    /// rounds) at 5 and 10 clusters.
    Table7,
}

/// Row cap for the k-NN grid.
pub const KNN_SAMPLE: usize = 5_000;

pub fn table_grid(table: TablePreset, seed: u64) -> Vec<ExperimentConfig> {
    let cell = |a: Algorithm, k: Option<usize>, p: Protocol| ExperimentConfig::new(a, k, p, seed);
    let all_levels = [Some(5), Some(10), Some(20), Some(50), None];
    let small = [5, 10];
    match table {
        TablePreset::Table3 => all_levels
            .iter()
            .map(|&k| cell(Algorithm::naive_bayes(), k, DEFAULT_HOLDOUT))
            .collect(),
        TablePreset::Table4 => all_levels
            .iter()
            .flat_map(|&k| {
                [5, 10].map(|folds| cell(Algorithm::logistic_regression(), k, Protocol::CrossValidation { folds }))
            })
            .collect(),
        TablePreset::Table5 => small
            .iter()
            .flat_map(|&k| [3, 5, 10].map(|d| cell(Algorithm::decision_tree(d), Some(k), DEFAULT_HOLDOUT)))
            .collect(),
        TablePreset::Table6 => [10, 20]
            .iter()
            .map(|&k| ExperimentConfig {
                sample: Some(KNN_SAMPLE),
                ..cell(Algorithm::Knn { k }, None, DEFAULT_HOLDOUT)
            })
            .collect(),
        TablePreset::Table7 => {
            let mut out = Vec::new();
            for &k in &small {
                for max_depth in [5, 10] {
                    for bags in [5, 10] {
                        out.push(cell(Algorithm::Bagging { max_depth, bags }, Some(k), DEFAULT_HOLDOUT));
                    }
                }
            }
            for &k in &small {
                for rounds in [10, 20, 40] {
                    out.push(cell(Algorithm::AdaBoost { max_depth: 3, rounds }, Some(k), DEFAULT_HOLDOUT));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (FeatureMatrix, Vec<usize>) {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let c = (i % 3) as f64;
                vec![c * 10.0 + (i as f64 * 0.37).sin(), c * -5.0 + (i as f64 * 0.91).cos()]
            })
            .collect();
        let labels = (0..60).map(|i| i % 3).collect();
        (FeatureMatrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn constant_labels_score_one() {
        let (x, _) = blobs();
        let y = vec![7; 60];
        for alg in [Algorithm::naive_bayes(), Algorithm::decision_tree(3), Algorithm::Knn { k: 3 }] {
            let cfg = ExperimentConfig::new(alg, None, Protocol::CrossValidation { folds: 5 }, 1);
            let r = cross_validate(&cfg, &x, &y).unwrap();
            assert_eq!(r.mean_accuracy, Some(1.0));
            assert_eq!(r.fold_accuracies.len(), 5);
        }
    }

    #[test]
    fn duplicated_points_give_perfect_one_nn() {
        let (x, y) = blobs();
        let rows: Vec<Vec<f64>> = x.rows().chain(x.rows()).map(<[f64]>::to_vec).collect();
        let labels: Vec<usize> = y.iter().chain(&y).copied().collect();
        // train on one copy, score on the other
        let fm = FeatureMatrix::from_rows(&rows).unwrap();
        let cfg = ExperimentConfig::new(Algorithm::Knn { k: 1 }, None, Protocol::CrossValidation { folds: 2 }, 0);
        let first: Vec<usize> = (0..60).collect();
        let second: Vec<usize> = (60..120).collect();
        assert_eq!(score_split(&cfg, &fm, &labels, &first, &second).unwrap(), 1.0);
        assert_eq!(score_split(&cfg, &fm, &labels, &second, &first).unwrap(), 1.0);
    }

    #[test]
    fn fold_errors_are_annotated() {
        let (x, y) = blobs();
        // k-NN with k larger than any training side
        let cfg = ExperimentConfig::new(Algorithm::Knn { k: 59 }, None, Protocol::CrossValidation { folds: 3 }, 0);
        assert!(matches!(cross_validate(&cfg, &x, &y), Err(Error::Fold { fold: 0, .. })));
    }

    #[test]
    fn grid_shapes() {
        let rows = |t| table_grid(t, 0).len();
        assert_eq!(
            [TablePreset::Table3, TablePreset::Table4, TablePreset::Table5, TablePreset::Table6, TablePreset::Table7]
                .map(rows),
            [5, 10, 6, 2, 14]
        );
    }

    #[test]
    fn matrix_isolates_failures_and_sorts() {
        let (x, y) = blobs();
        let grid = vec![
            ExperimentConfig::new(Algorithm::decision_tree(2), Some(2), DEFAULT_HOLDOUT, 0),
            ExperimentConfig::new(Algorithm::Knn { k: 500 }, None, DEFAULT_HOLDOUT, 0),
            ExperimentConfig::new(Algorithm::naive_bayes(), Some(3), DEFAULT_HOLDOUT, 0),
        ];
        let report = run_experiment_matrix(&grid, &x, &y, 1).unwrap();
        let ids: Vec<&str> = report.rows.iter().map(|r| r.config.algorithm.id()).collect();
        assert_eq!(ids, ["naive_bayes", "decision_tree", "knn"]);
        assert!(report.rows[0].is_ok() && report.rows[1].is_ok());
        assert!(!report.rows[2].is_ok());
        let text = report.to_text();
        assert!(text.contains("Naive Bayes") && text.contains("FAILED"));
        assert!(run_experiment_matrix(&[], &x, &y, 1).is_err());
    }

    #[test]
    fn validation_lists_every_problem() {
        let cfg = ExperimentConfig {
            sample: Some(0),
            ..ExperimentConfig::new(Algorithm::Bagging { max_depth: 0, bags: 0 }, Some(0), Protocol::CrossValidation { folds: 1 }, 0)
        };
        assert_eq!(cfg.problems().len(), 5);
    }

    #[test]
    fn config_json() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"algorithm":{"name":"adaboost","max_depth":3,"rounds":10},"coarsening":5,
                "protocol":{"kind":"holdout","test_fraction":0.2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::AdaBoost { max_depth: 3, rounds: 10 });
        assert!(cfg.use_destinations && cfg.standardize);
    }
}
