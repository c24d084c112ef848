//! Greedy binary decision trees with weighted impurity.
//!
//! Continuous features split at midpoints between consecutive distinct values
//! (`x <= t` goes left); categorical features split one value against the rest
//! (`x == v` goes left). Candidate splits are scanned feature by feature in
//! ascending threshold order and the first best one is kept.

use serde::{Deserialize, Serialize};

use super::{argmax, check_training_set, check_weights, Classes, Classifier};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Entropy,
    Gini,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum number of training rows on each side of a split.
    pub min_leaf: usize,
    pub criterion: Criterion,
}

impl TreeParams {
    pub fn new(max_depth: usize) -> Self {
        TreeParams {
            max_depth,
            min_leaf: 1,
            criterion: Criterion::Entropy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Split {
    Threshold { feature: usize, threshold: f64 },
    Category { feature: usize, value: f64 },
}

impl Split {
    pub fn goes_left(&self, row: &[f64]) -> bool {
        match *self {
            Split::Threshold { feature, threshold } => row[feature] <= threshold,
            Split::Category { feature, value } => row[feature] == value,
        }
    }

    pub fn feature(&self) -> usize {
        match *self {
            Split::Threshold { feature, .. } | Split::Category { feature, .. } => feature,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Majority label (lowest label on ties).
        class: usize,
        /// Weighted training counts per class index.
        counts: Vec<f64>,
    },
    Internal {
        split: Split,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub classes: Classes,
    pub n_features: usize,
    pub params: TreeParams,
    /// Arena; the root is node 0.
    pub nodes: Vec<Node>,
}

/// Per-side sufficient statistics for incremental impurity updates.
#[derive(Clone)]
struct SideStats {
    counts: Vec<f64>,
    total: f64,
    rows: usize,
    /// Σ c·ln c
    sum_clogc: f64,
    /// Σ c²
    sum_sq: f64,
}

fn clogc(c: f64) -> f64 {
    if c > 0.0 {
        c * c.ln()
    } else {
        0.0
    }
}

impl SideStats {
    fn empty(k: usize) -> Self {
        SideStats {
            counts: vec![0.0; k],
            total: 0.0,
            rows: 0,
            sum_clogc: 0.0,
            sum_sq: 0.0,
        }
    }

    fn from_counts(counts: Vec<f64>, rows: usize) -> Self {
        SideStats {
            total: counts.iter().sum(),
            sum_clogc: counts.iter().map(|&c| clogc(c)).sum(),
            sum_sq: counts.iter().map(|c| c * c).sum(),
            counts,
            rows,
        }
    }

    fn add(&mut self, class: usize, w: f64, sign: f64) {
        let old = self.counts[class];
        let new = old + sign * w;
        self.sum_clogc += clogc(new) - clogc(old);
        self.sum_sq += new * new - old * old;
        self.counts[class] = new;
        self.total += sign * w;
        if sign > 0.0 {
            self.rows += 1;
        } else {
            self.rows -= 1;
        }
    }

    fn impurity(&self, criterion: Criterion) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        match criterion {
            Criterion::Entropy => (self.total.ln() - self.sum_clogc / self.total).max(0.0),
            Criterion::Gini => (1.0 - self.sum_sq / (self.total * self.total)).max(0.0),
        }
    }
}

fn weighted_child_impurity(left: &SideStats, right: &SideStats, total: f64, c: Criterion) -> f64 {
    (left.total * left.impurity(c) + right.total * right.impurity(c)) / total
}

/// Fit a tree on `features`/`labels`, optionally weighting rows.
pub fn tree_fit(
    features: &FeatureMatrix,
    labels: &[usize],
    params: TreeParams,
    sample_weights: Option<&[f64]>,
) -> Result<DecisionTreeModel> {
    check_training_set(features, labels)?;
    check_weights(sample_weights, labels.len())?;
    if params.max_depth == 0 {
        return Err(Error::arg("max_depth must be ≥ 1"));
    }
    if params.min_leaf == 0 {
        return Err(Error::arg("min_leaf must be ≥ 1"));
    }
    let classes = Classes::from_labels(labels);
    let mut builder = Builder {
        features,
        y: classes.encode(labels),
        w: sample_weights.map_or_else(|| vec![1.0; labels.len()], <[f64]>::to_vec),
        k: classes.len(),
        params,
        classes: &classes,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..labels.len()).collect();
    builder.grow(all, 0);
    let nodes = builder.nodes;
    Ok(DecisionTreeModel {
        classes,
        n_features: features.n_features(),
        params,
        nodes,
    })
}

struct Builder<'a> {
    features: &'a FeatureMatrix,
    y: Vec<usize>,
    w: Vec<f64>,
    k: usize,
    params: TreeParams,
    classes: &'a Classes,
    nodes: Vec<Node>,
}

struct Candidate {
    split: Split,
    /// Weighted child impurity; lower is better.
    impurity: f64,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let mut counts = vec![0.0; self.k];
        for &i in &rows {
            counts[self.y[i]] += self.w[i];
        }
        let id = self.nodes.len();
        let pure = {
            let first = self.y[rows[0]];
            rows.iter().all(|&i| self.y[i] == first)
        };
        let splittable =
            depth < self.params.max_depth && !pure && rows.len() >= 2 * self.params.min_leaf;
        let best = if splittable {
            self.best_split(&rows, &counts)
        } else {
            None
        };
        let Some(best) = best else {
            let class = self.classes.label(argmax(&counts));
            self.nodes.push(Node::Leaf { class, counts });
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| best.split.goes_left(self.features.row(i)));
        // placeholder, patched once both children exist
        self.nodes.push(Node::Leaf {
            class: 0,
            counts: Vec::new(),
        });
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Internal {
            split: best.split,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize], counts: &[f64]) -> Option<Candidate> {
        let parent = SideStats::from_counts(counts.to_vec(), rows.len());
        let total = parent.total;
        if total <= 0.0 {
            return None;
        }
        let min_leaf = self.params.min_leaf;
        let criterion = self.params.criterion;
        let mut best: Option<Candidate> = None;
        let mut consider = |split: Split, impurity: f64| {
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(Candidate { split, impurity });
            }
        };
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for j in 0..self.features.n_features() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.features.get(i, j), i)));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            if sorted[0].0 == sorted[sorted.len() - 1].0 {
                continue;
            }
            match self.features.kinds()[j] {
                FeatureKind::Continuous => {
                    let mut left = SideStats::empty(self.k);
                    let mut right = parent.clone();
                    for pos in 0..sorted.len() - 1 {
                        let (x, i) = sorted[pos];
                        left.add(self.y[i], self.w[i], 1.0);
                        right.add(self.y[i], self.w[i], -1.0);
                        let next = sorted[pos + 1].0;
                        if next == x || left.rows < min_leaf || right.rows < min_leaf {
                            continue;
                        }
                        let mut threshold = x + (next - x) / 2.0;
                        if threshold >= next {
                            threshold = x;
                        }
                        consider(
                            Split::Threshold { feature: j, threshold },
                            weighted_child_impurity(&left, &right, total, criterion),
                        );
                    }
                }
                FeatureKind::Categorical => {
                    let mut start = 0;
                    while start < sorted.len() {
                        let value = sorted[start].0;
                        let mut end = start;
                        let mut group = SideStats::empty(self.k);
                        while end < sorted.len() && sorted[end].0 == value {
                            let i = sorted[end].1;
                            group.add(self.y[i], self.w[i], 1.0);
                            end += 1;
                        }
                        let rest_counts: Vec<f64> =
                            counts.iter().zip(&group.counts).map(|(a, b)| a - b).collect();
                        let rest = SideStats::from_counts(rest_counts, rows.len() - group.rows);
                        if group.rows >= min_leaf && rest.rows >= min_leaf {
                            consider(
                                Split::Category { feature: j, value },
                                weighted_child_impurity(&group, &rest, total, criterion),
                            );
                        }
                        start = end;
                    }
                }
            }
        }
        best
    }
}

impl DecisionTreeModel {
    fn leaf_for(&self, row: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        loop {
            match node {
                Node::Leaf { .. } => return node,
                Node::Internal { split, left, right } => {
                    node = &self.nodes[if split.goes_left(row) { *left } else { *right }];
                }
            }
        }
    }

    /// Longest root-to-leaf path, in splits.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn root_split(&self) -> Option<Split> {
        match &self.nodes[0] {
            Node::Internal { split, .. } => Some(*split),
            Node::Leaf { .. } => None,
        }
    }

    pub(crate) fn predict_row(&self, row: &[f64]) -> usize {
        match self.leaf_for(row) {
            Node::Leaf { class, .. } => *class,
            Node::Internal { .. } => unreachable!("leaf_for stops at leaves"),
        }
    }
}

impl Classifier for DecisionTreeModel {
    fn classes(&self) -> &[usize] {
        self.classes.labels()
    }

    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        features.check_width(self.n_features)?;
        Ok(features.rows().map(|r| self.predict_row(r)).collect())
    }
}
