//! Label coarsening: k-means (k-means++ seeding, Lloyd iterations) over
//! feature vectors, whose cluster assignments replace the original classes.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Standardizer};
use crate::rng::{self, streams};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMeansInit {
    #[default]
    PlusPlus,
    /// k distinct points drawn uniformly.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves more than this (Euclidean).
    pub tol: f64,
    pub seed: u64,
    pub init: KMeansInit,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansParams {
            k,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            seed,
            init: KMeansInit::PlusPlus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub dim: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances of the training points to their final centroids.
    pub inertia: f64,
    pub iterations_run: usize,
    pub seed: u64,
}

pub fn kmeans_fit(
    features: &FeatureMatrix,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansModel> {
    let params = KMeansParams {
        k,
        max_iter,
        tol,
        seed,
        init: KMeansInit::PlusPlus,
    };
    kmeans_fit_traced(features, &params, &mut |_| {}).map(|(m, _)| m)
}

/// Fit and also return the final training assignment. `on_assign` receives
/// the inertia after every assignment step, the final one included.
pub fn kmeans_fit_traced(
    features: &FeatureMatrix,
    params: &KMeansParams,
    on_assign: &mut dyn FnMut(f64),
) -> Result<(KMeansModel, Vec<usize>)> {
    let n = features.n_rows();
    let k = params.k;
    if n == 0 || features.n_features() == 0 {
        return Err(Error::arg("k-means on empty features"));
    }
    if k == 0 {
        return Err(Error::arg("k-means needs k ≥ 1"));
    }
    if n < k {
        return Err(Error::arg(format!("k-means with k = {k} but only {n} points")));
    }
    if params.max_iter == 0 {
        return Err(Error::arg("k-means needs max_iter ≥ 1"));
    }
    if params.tol.is_nan() || params.tol < 0.0 {
        return Err(Error::arg("k-means needs tol ≥ 0"));
    }

    let mut rng = rng::substream(params.seed, streams::KMEANS, 0);
    let mut centroids = match params.init {
        KMeansInit::PlusPlus => plus_plus(features, k, &mut rng),
        KMeansInit::Uniform => index::sample(&mut rng, n, k)
            .into_iter()
            .map(|i| features.row(i).to_vec())
            .collect(),
    };

    let mut iterations_run = 0;
    for _ in 0..params.max_iter {
        let assigned = assign_all(&centroids, features);
        on_assign(assigned.iter().map(|a| a.1).sum());
        let updated = update_centroids(features, &assigned, &centroids);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        iterations_run += 1;
        if shift < params.tol || shift == 0.0 {
            break;
        }
    }

    let assigned = assign_all(&centroids, features);
    let inertia = assigned.iter().map(|a| a.1).sum();
    on_assign(inertia);
    Ok((
        KMeansModel {
            k,
            dim: features.n_features(),
            centroids,
            inertia,
            iterations_run,
            seed: params.seed,
        },
        assigned.into_iter().map(|a| a.0).collect(),
    ))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest centroid; ties go to the lowest index.
fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(centroid, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign_all(centroids: &[Vec<f64>], features: &FeatureMatrix) -> Vec<(usize, f64)> {
    (0..features.n_rows())
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| nearest(centroids, features.row(i)))
        .collect()
}

fn plus_plus(features: &FeatureMatrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = features.n_rows();
    let mut centroids = vec![features.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = features.rows().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` a hair below `target`
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..n)
        };
        let c = features.row(pick).to_vec();
        for (i, r) in features.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Means of the assigned points. An empty cluster is reseeded at the point
/// farthest from its current centroid.
fn update_centroids(
    features: &FeatureMatrix,
    assigned: &[(usize, f64)],
    old: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let k = old.len();
    let d = features.n_features();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (row, &(c, _)) in features.rows().zip(assigned) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(row) {
            *s += x;
        }
    }
    let mut dist: Vec<f64> = assigned.iter().map(|a| a.1).collect();
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            sums[c].iter_mut().for_each(|s| *s /= n);
        } else {
            let far = dist
                .iter()
                .enumerate()
                .fold(0, |best, (i, &v)| if v > dist[best] { i } else { best });
            sums[c] = features.row(far).to_vec();
            dist[far] = 0.0;
        }
    }
    sums
}

/// Nearest-centroid index of every row; ties go to the lowest centroid index.
pub fn kmeans_assign(model: &KMeansModel, features: &FeatureMatrix) -> Result<Vec<usize>> {
    features.check_width(model.dim)?;
    Ok(assign_all(&model.centroids, features)
        .into_iter()
        .map(|a| a.0)
        .collect())
}

/// Cluster `features` into `k` groups; the assignment is the new label in `[0, k)`.
pub fn coarsen_labels(
    features: &FeatureMatrix,
    k: usize,
    seed: u64,
) -> Result<(KMeansModel, Vec<usize>)> {
    kmeans_fit_traced(features, &KMeansParams::new(k, seed), &mut |_| {})
}

/// Standardization plus k-means, fit on training rows and reusable on held-out rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelCoarsener {
    pub standardizer: Standardizer,
    pub model: KMeansModel,
}

impl LabelCoarsener {
    /// Returns the coarsener and the coarse labels of the training rows.
    pub fn fit(raw: &FeatureMatrix, k: usize, seed: u64) -> Result<(Self, Vec<usize>)> {
        let standardizer = Standardizer::fit(raw);
        let (model, labels) = coarsen_labels(&standardizer.apply(raw)?, k, seed)?;
        Ok((LabelCoarsener { standardizer, model }, labels))
    }

    pub fn assign(&self, raw: &FeatureMatrix) -> Result<Vec<usize>> {
        kmeans_assign(&self.model, &self.standardizer.apply(raw)?)
    }
}

/// Joint counts of two labelings over the same rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    /// `counts[r][c]` rows carry `row_labels[r]` and `col_labels[c]`.
    pub counts: Vec<Vec<usize>>,
}

impl ContingencyTable {
    pub fn get(&self, a: usize, b: usize) -> usize {
        match (
            self.row_labels.binary_search(&a),
            self.col_labels.binary_search(&b),
        ) {
            (Ok(r), Ok(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }
}

pub fn crosstab(labels_a: &[usize], labels_b: &[usize]) -> Result<ContingencyTable> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::arg(format!(
            "crosstab of labelings with lengths {} and {}",
            labels_a.len(),
            labels_b.len()
        )));
    }
    if labels_a.is_empty() {
        return Err(Error::arg("crosstab of empty labelings"));
    }
    let row_labels: Vec<usize> = labels_a.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let col_labels: Vec<usize> = labels_b.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut counts = vec![vec![0; col_labels.len()]; row_labels.len()];
    for (a, b) in labels_a.iter().zip(labels_b) {
        let r = row_labels.binary_search(a).expect("label collected above");
        let c = col_labels.binary_search(b).expect("label collected above");
        counts[r][c] += 1;
    }
    Ok(ContingencyTable {
        row_labels,
        col_labels,
        counts,
    })
}

/// Stack-bar plot data: one row per `labels_a` value, one column per `labels_b` value.
pub fn write_crosstab_csv<W: Write>(t: &ContingencyTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(
        std::iter::once("label".to_string()).chain(t.col_labels.iter().map(|c| c.to_string())),
    )?;
    for (label, row) in t.row_labels.iter().zip(&t.counts) {
        w.write_record(std::iter::once(label.to_string()).chain(row.iter().map(|c| c.to_string())))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> FeatureMatrix {
        FeatureMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn single_cluster_is_global_mean() {
        let m = kmeans_fit(&square(), 1, 0, 300, 1e-4).unwrap();
        assert_eq!(m.centroids, vec![vec![5.0, 0.5]]);
        assert_eq!(m.inertia, 101.0);
    }

    #[test]
    fn k_equals_n_reproduces_points() {
        let fm = square();
        let m = kmeans_fit(&fm, 4, 3, 300, 1e-4).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut got = m.centroids.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want: Vec<Vec<f64>> = fm.rows().map(<[f64]>::to_vec).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn argument_errors() {
        assert!(kmeans_fit(&square(), 5, 0, 300, 1e-4).is_err());
        assert!(kmeans_fit(&square(), 0, 0, 300, 1e-4).is_err());
        assert!(kmeans_fit(&square(), 2, 0, 0, 1e-4).is_err());
        assert!(kmeans_fit(&square(), 2, 0, 10, -1.0).is_err());
        let empty = FeatureMatrix::from_rows(&[]).unwrap();
        assert!(kmeans_fit(&empty, 1, 0, 10, 1e-4).is_err());
    }

    #[test]
    fn assignment_rules() {
        let model = KMeansModel {
            k: 4,
            dim: 1,
            centroids: vec![vec![-9.0], vec![0.0], vec![2.0], vec![5.0]],
            inertia: 0.0,
            iterations_run: 0,
            seed: 0,
        };
        let fm = FeatureMatrix::from_rows(&[vec![5.0], vec![1.0]]).unwrap();
        assert_eq!(kmeans_assign(&model, &fm).unwrap(), vec![3, 1]);
        let wide = FeatureMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(kmeans_assign(&model, &wide).is_err());
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // three coincident points and one outlier; the second centroid starts far away
        let fm = FeatureMatrix::from_rows(&[vec![0.0], vec![0.0], vec![0.0], vec![4.0]]).unwrap();
        let assigned = vec![(0, 0.0), (0, 0.0), (0, 0.0), (0, 16.0)];
        let updated = update_centroids(&fm, &assigned, &[vec![0.0], vec![100.0]]);
        assert_eq!(updated, vec![vec![1.0], vec![4.0]]);
    }

    #[test]
    fn crosstab_examples() {
        let t = crosstab(&[0, 0, 1], &[1, 1, 0]).unwrap();
        assert_eq!(t.get(0, 1), 2);
        assert_eq!(t.get(1, 0), 1);
        assert_eq!(t.get(0, 0), 0);
        assert_eq!(t.total(), 3);

        let same = crosstab(&[2, 0, 1, 2], &[2, 0, 1, 2]).unwrap();
        for (r, row) in same.counts.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert_eq!(v > 0, r == c);
            }
        }
        assert!(crosstab(&[0, 1], &[0]).is_err());
        assert!(crosstab(&[], &[]).is_err());

        let mut buf = Vec::new();
        write_crosstab_csv(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "label,0,1\n0,0,2\n1,1,0\n");
    }
}
