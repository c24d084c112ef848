//! Immutable column-major tables.

use std::collections::HashSet;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Integer,
    Real,
    /// Integer codes with no ordering semantics (site ids, countries, ...).
    Categorical,
    Timestamp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub ty: ColumnType,
    pub nullable: bool,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, ty: ColumnType, nullable: bool) -> Self {
        ColumnSpec {
            name: name.into(),
            ty,
            nullable,
        }
    }
}

/// Cell storage for one column. `None` marks a missing value.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Integer(Vec<Option<i64>>),
    Real(Vec<Option<f64>>),
    Categorical(Vec<Option<i64>>),
    Timestamp(Vec<Option<NaiveDateTime>>),
}

impl ColumnData {
    pub fn empty(ty: ColumnType) -> Self {
        match ty {
            ColumnType::Integer => ColumnData::Integer(Vec::new()),
            ColumnType::Real => ColumnData::Real(Vec::new()),
            ColumnType::Categorical => ColumnData::Categorical(Vec::new()),
            ColumnType::Timestamp => ColumnData::Timestamp(Vec::new()),
        }
    }

    pub fn ty(&self) -> ColumnType {
        match self {
            ColumnData::Integer(_) => ColumnType::Integer,
            ColumnData::Real(_) => ColumnType::Real,
            ColumnData::Categorical(_) => ColumnType::Categorical,
            ColumnData::Timestamp(_) => ColumnType::Timestamp,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Integer(v) | ColumnData::Categorical(v) => v.len(),
            ColumnData::Real(v) => v.len(),
            ColumnData::Timestamp(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            ColumnData::Integer(v) | ColumnData::Categorical(v) => v[row].is_none(),
            ColumnData::Real(v) => v[row].is_none(),
            ColumnData::Timestamp(v) => v[row].is_none(),
        }
    }

    pub fn has_missing(&self) -> bool {
        (0..self.len()).any(|i| self.is_missing(i))
    }

    /// Integer view of an integer or categorical cell.
    pub fn get_i64(&self, row: usize) -> Option<i64> {
        match self {
            ColumnData::Integer(v) | ColumnData::Categorical(v) => v[row],
            _ => None,
        }
    }

    /// Numeric view of any non-timestamp cell.
    pub fn get_f64(&self, row: usize) -> Option<f64> {
        match self {
            ColumnData::Integer(v) | ColumnData::Categorical(v) => v[row].map(|x| x as f64),
            ColumnData::Real(v) => v[row],
            ColumnData::Timestamp(_) => None,
        }
    }

    pub fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Integer(v) => ColumnData::Integer(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Real(v) => ColumnData::Real(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&i| v[i]).collect())
            }
            ColumnData::Timestamp(v) => ColumnData::Timestamp(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Column {
            name: name.into(),
            data,
        }
    }
}

/// A table of named, typed, equal-length columns. Transforms never mutate a
/// dataset in place; they build a new one.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.data.len());
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::schema(format!("duplicate column `{}`", c.name)));
            }
            if c.data.len() != n_rows {
                return Err(Error::schema(format!(
                    "column `{}` has {} rows, expected {}",
                    c.name,
                    c.data.len(),
                    n_rows
                )));
            }
        }
        Ok(Dataset { columns, n_rows })
    }

    /// A zero-row dataset with the given columns.
    pub fn empty(specs: &[ColumnSpec]) -> Result<Self> {
        Dataset::new(
            specs
                .iter()
                .map(|s| Column::new(s.name.clone(), ColumnData::empty(s.ty)))
                .collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Like [`Dataset::column`] but reports a schema error when absent.
    pub fn require(&self, name: &str) -> Result<&Column> {
        self.column(name)
            .ok_or_else(|| Error::schema(format!("missing column `{name}`")))
    }

    /// Column specs in storage order; a column is nullable iff it holds a missing value.
    pub fn schema(&self) -> Vec<ColumnSpec> {
        self.columns
            .iter()
            .map(|c| ColumnSpec::new(c.name.clone(), c.data.ty(), c.data.has_missing()))
            .collect()
    }

    /// Rows at `rows`, in the given order (indices may repeat).
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column::new(c.name.clone(), c.data.take(rows)))
                .collect(),
            n_rows: rows.len(),
        }
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }
}
