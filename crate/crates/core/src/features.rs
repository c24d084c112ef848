//! Model-ready feature matrices and the exploratory statistics computed on them.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::data::schema::{CNT, IS_BOOKING, USER_ID};
use crate::data::{Column, ColumnData, ColumnType, Dataset};
use crate::error::{Error, Result};

/// Columns never used as model inputs: an identifier, a constant after
/// booking filtering, and the session counter which leaks outcome structure.
pub const EXCLUDED_FEATURES: [&str; 3] = [USER_ID, IS_BOOKING, CNT];

/// Replace every timestamp column `<name>` with integer columns
/// `<name>_month` and `<name>_year`, in place of the original.
pub fn discretize_dates(dataset: &Dataset) -> Result<Dataset> {
    let mut out = Vec::with_capacity(dataset.n_cols() + 3);
    for col in dataset.columns() {
        let ColumnData::Timestamp(values) = &col.data else {
            out.push(col.clone());
            continue;
        };
        let mut months = Vec::with_capacity(values.len());
        let mut years = Vec::with_capacity(values.len());
        for (i, t) in values.iter().enumerate() {
            let t = t.ok_or_else(|| Error::Row {
                line: i as u64 + 2,
                column: col.name.clone(),
                message: "missing date".into(),
            })?;
            months.push(Some(i64::from(t.month())));
            years.push(Some(i64::from(t.year())));
        }
        out.push(Column::new(format!("{}_month", col.name), ColumnData::Integer(months)));
        out.push(Column::new(format!("{}_year", col.name), ColumnData::Integer(years)));
    }
    Dataset::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    /// Integer codes; learners that care compare them for equality only.
    Categorical,
}

/// Per-feature z-score parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations, with 0 replaced by 1.
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &FeatureMatrix) -> Standardizer {
        let n = features.n_rows() as f64;
        let d = features.n_features();
        let mut means = vec![0.0; d];
        for row in features.rows() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n.max(1.0));
        let mut vars = vec![0.0; d];
        for row in features.rows() {
            for ((v, x), m) in vars.iter_mut().zip(row).zip(&means) {
                *v += (x - m) * (x - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n.max(1.0)).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { means, stds }
    }

    /// Transform with these parameters; the result records them.
    pub fn apply(&self, features: &FeatureMatrix) -> Result<FeatureMatrix> {
        if features.n_features() != self.means.len() {
            return Err(Error::arg(format!(
                "standardizer expects {} features, got {}",
                self.means.len(),
                features.n_features()
            )));
        }
        let d = self.means.len();
        let mut values = features.values.clone();
        for row in values.chunks_mut(d.max(1)) {
            for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
                *x = (*x - m) / s;
            }
        }
        Ok(FeatureMatrix {
            n_rows: features.n_rows,
            names: features.names.clone(),
            kinds: features.kinds.clone(),
            values,
            standardization: Some(self.clone()),
        })
    }
}

/// Dense row-major `n × d` real matrix with named, typed features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
    values: Vec<f64>,
    standardization: Option<Standardizer>,
}

impl FeatureMatrix {
    pub fn new(
        n_rows: usize,
        names: Vec<String>,
        kinds: Vec<FeatureKind>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if names.len() != kinds.len() {
            return Err(Error::arg("feature names and kinds differ in length"));
        }
        if values.len() != n_rows * names.len() {
            return Err(Error::arg(format!(
                "expected {} values for a {}×{} matrix, got {}",
                n_rows * names.len(),
                n_rows,
                names.len(),
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::arg(format!("duplicate feature `{dup}`")));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("feature values must be finite"));
        }
        Ok(FeatureMatrix {
            n_rows,
            names,
            kinds,
            values,
            standardization: None,
        })
    }

    /// All-continuous matrix from rows; mostly useful for tests and fixtures.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::arg("ragged rows"));
        }
        FeatureMatrix::new(
            rows.len(),
            (0..d).map(|j| format!("x{j}")).collect(),
            vec![FeatureKind::Continuous; d],
            rows.concat(),
        )
    }

    pub fn with_kinds(mut self, kinds: Vec<FeatureKind>) -> Result<Self> {
        if kinds.len() != self.names.len() {
            return Err(Error::arg("kinds length differs from feature count"));
        }
        self.kinds = kinds;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn standardization(&self) -> Option<&Standardizer> {
        self.standardization.as_ref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_features() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Rows at `rows` in that order; repeats allowed.
    pub fn take_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_features());
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            n_rows: rows.len(),
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            values,
            standardization: self.standardization.clone(),
        }
    }

    /// Keep the features whose name satisfies `keep`; drops standardization params.
    pub fn select_features(&self, keep: impl Fn(&str) -> bool) -> FeatureMatrix {
        let cols: Vec<usize> = (0..self.n_features()).filter(|&j| keep(&self.names[j])).collect();
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for r in self.rows() {
            values.extend(cols.iter().map(|&j| r[j]));
        }
        FeatureMatrix {
            n_rows: self.n_rows,
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            kinds: cols.iter().map(|&j| self.kinds[j]).collect(),
            values,
            standardization: None,
        }
    }

    /// Error unless `other` has the same feature count.
    pub fn check_width(&self, expected: usize) -> Result<()> {
        if self.n_features() == expected {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "feature dimension mismatch: model expects {expected}, got {}",
                self.n_features()
            )))
        }
    }
}

/// Turn a discretized dataset into a feature matrix plus integer labels.
///
/// Every column except the target and [`EXCLUDED_FEATURES`] becomes a feature.
/// Categorical columns keep their integer codes and are tagged
/// [`FeatureKind::Categorical`].
pub fn build_feature_matrix(
    dataset: &Dataset,
    target: &str,
    standardize: bool,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    let target_col = dataset.require(target)?;
    if !matches!(target_col.data.ty(), ColumnType::Integer | ColumnType::Categorical) {
        return Err(Error::schema(format!("target `{target}` must be integer-typed")));
    }
    if dataset.is_empty() {
        return Err(Error::arg("cannot build features from zero rows"));
    }
    let labels = (0..dataset.n_rows())
        .map(|i| match target_col.data.get_i64(i) {
            Some(v) if v >= 0 => Ok(v as usize),
            Some(v) => Err(Error::Row {
                line: i as u64 + 2,
                column: target.into(),
                message: format!("negative label {v}"),
            }),
            None => Err(Error::Row {
                line: i as u64 + 2,
                column: target.into(),
                message: "missing label".into(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;

    let feature_cols: Vec<&Column> = dataset
        .columns()
        .iter()
        .filter(|c| c.name != target && !EXCLUDED_FEATURES.contains(&c.name.as_str()))
        .collect();
    for c in &feature_cols {
        if c.data.ty() == ColumnType::Timestamp {
            return Err(Error::schema(format!(
                "timestamp column `{}` must be discretized first",
                c.name
            )));
        }
    }
    let d = feature_cols.len();
    let mut values = vec![0.0; dataset.n_rows() * d];
    for (j, c) in feature_cols.iter().enumerate() {
        for i in 0..dataset.n_rows() {
            values[i * d + j] = c.data.get_f64(i).ok_or_else(|| Error::Row {
                line: i as u64 + 2,
                column: c.name.clone(),
                message: "missing value reached the feature matrix (impute first)".into(),
            })?;
        }
    }
    let fm = FeatureMatrix::new(
        dataset.n_rows(),
        feature_cols.iter().map(|c| c.name.clone()).collect(),
        feature_cols
            .iter()
            .map(|c| match c.data.ty() {
                ColumnType::Categorical => FeatureKind::Categorical,
                _ => FeatureKind::Continuous,
            })
            .collect(),
        values,
    )?;
    let fm = if standardize {
        Standardizer::fit(&fm).apply(&fm)?
    } else {
        fm
    };
    Ok((fm, labels))
}

/// Pearson correlations between every pair of features.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

pub fn correlation_matrix(features: &FeatureMatrix) -> Result<CorrelationMatrix> {
    let n = features.n_rows();
    if n < 2 {
        return Err(Error::arg("correlation needs at least 2 rows"));
    }
    let d = features.n_features();
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let col = features.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            col.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut entries = vec![vec![0.0; d]; d];
    for a in 0..d {
        entries[a][a] = 1.0;
        for b in a + 1..d {
            let r = if norms[a] > 0.0 && norms[b] > 0.0 {
                let dot: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
                (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            entries[a][b] = r;
            entries[b][a] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: features.names().to_vec(),
        entries,
    })
}

pub fn class_histogram(labels: &[usize]) -> Result<BTreeMap<usize, usize>> {
    if labels.is_empty() {
        return Err(Error::arg("histogram of an empty label vector"));
    }
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Plot data: a `feature` column followed by one column per feature.
pub fn write_correlation_csv<W: Write>(m: &CorrelationMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(std::iter::once("feature").chain(m.names.iter().map(String::as_str)))?;
    for (name, row) in m.names.iter().zip(&m.entries) {
        w.write_record(std::iter::once(name.clone()).chain(row.iter().map(|x| x.to_string())))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Plot data: `class,count` rows in ascending class order.
pub fn write_histogram_csv<W: Write>(h: &BTreeMap<usize, usize>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["class", "count"])?;
    for (c, n) in h {
        w.write_record([c.to_string(), n.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::parse_timestamp;

    fn ts(name: &str, v: &[&str]) -> Column {
        Column::new(name, ColumnData::Timestamp(v.iter().map(|s| parse_timestamp(s)).collect()))
    }

    fn ints(name: &str, v: &[i64]) -> Column {
        Column::new(name, ColumnData::Integer(v.iter().map(|&x| Some(x)).collect()))
    }

    #[test]
    fn dates_become_month_and_year() {
        let ds = Dataset::new(vec![
            ts("date_time", &["2014-08-11 07:46:59", "10-04-2016"]),
            ints("keep", &[1, 2]),
        ])
        .unwrap();
        let out = discretize_dates(&ds).unwrap();
        let names: Vec<_> = out.names().collect();
        assert_eq!(names, ["date_time_month", "date_time_year", "keep"]);
        let m = &out.column("date_time_month").unwrap().data;
        let y = &out.column("date_time_year").unwrap().data;
        assert_eq!((m.get_i64(0), y.get_i64(0)), (Some(8), Some(2014)));
        assert_eq!((m.get_i64(1), y.get_i64(1)), (Some(10), Some(2016)));
        assert_eq!(out.n_rows(), 2);
        assert_eq!(discretize_dates(&ds).unwrap(), out);
    }

    #[test]
    fn builds_labels_and_excludes_columns() {
        let ds = Dataset::new(vec![
            ints("a", &[2, 4, 3]),
            ints(USER_ID, &[9, 9, 9]),
            ints(CNT, &[1, 1, 1]),
            ints("hotel_cluster", &[5, 6, 5]),
        ])
        .unwrap();
        let (fm, labels) = build_feature_matrix(&ds, "hotel_cluster", false).unwrap();
        assert_eq!(labels, vec![5, 6, 5]);
        assert_eq!(fm.names(), ["a"]);
        assert!(matches!(build_feature_matrix(&ds, "nope", false), Err(Error::Schema(_))));
        let undated = Dataset::new(vec![ts("srch_ci", &["2014-01-01"]), ints("y", &[1])]).unwrap();
        assert!(matches!(build_feature_matrix(&undated, "y", false), Err(Error::Schema(_))));
        let empty = Dataset::new(vec![ints("a", &[]), ints("y", &[])]).unwrap();
        assert!(matches!(build_feature_matrix(&empty, "y", false), Err(Error::Argument(_))));
    }

    #[test]
    fn standardization_by_hand_and_constant_guard() {
        let ds = Dataset::new(vec![ints("a", &[2, 4]), ints("c", &[7, 7]), ints("y", &[0, 1])]).unwrap();
        let (fm, _) = build_feature_matrix(&ds, "y", true).unwrap();
        // mean 3, population std 1
        assert_eq!(fm.column(0), vec![-1.0, 1.0]);
        assert_eq!(fm.column(1), vec![0.0, 0.0]);
        let params = fm.standardization().unwrap();
        assert_eq!(params.stds, vec![1.0, 1.0]);
        let (raw, _) = build_feature_matrix(&ds, "y", false).unwrap();
        assert_eq!(params.apply(&raw).unwrap(), fm);
    }

    #[test]
    fn pearson_examples() {
        let fm = FeatureMatrix::from_rows(&[
            vec![1.0, 2.0, -1.0, 5.0],
            vec![2.0, 4.0, -2.0, 5.0],
            vec![3.0, 7.0, -3.0, 5.0],
        ])
        .unwrap();
        let c = correlation_matrix(&fm).unwrap();
        assert_eq!(c.entries[0][0], 1.0);
        assert!((c.entries[0][2] + 1.0).abs() < 1e-12);
        // centered x = (-1,0,1), y = (-7/3,-1/3,8/3): r = 5 / sqrt(2 * 114/9)
        let expected = 5.0 / (2.0f64 * 114.0 / 9.0).sqrt();
        assert!((c.entries[0][1] - expected).abs() < 1e-12);
        assert!((c.entries[0][1] - 0.9934).abs() < 1e-4);
        assert_eq!(c.entries[0][3], 0.0);
        assert_eq!(c.entries[3][3], 1.0);
        assert!(correlation_matrix(&FeatureMatrix::from_rows(&[vec![1.0]]).unwrap()).is_err());
    }

    #[test]
    fn histogram() {
        let h = class_histogram(&[0, 0, 1]).unwrap();
        assert_eq!(h.into_iter().collect::<Vec<_>>(), vec![(0, 2), (1, 1)]);
        let all: Vec<usize> = (0..100).collect();
        assert!(class_histogram(&all).unwrap().values().all(|&c| c == 1));
        assert!(class_histogram(&[]).is_err());
    }
}
