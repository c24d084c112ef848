//! End-to-end preparation: events (and destinations) to a raw feature matrix
//! plus hotel-cluster labels.

use serde::{Deserialize, Serialize};

use crate::data::schema::{DATE_TIME, HOTEL_CLUSTER, SRCH_CI, SRCH_CO};
use crate::data::{
    filter_bookings, impute_distance, merge_on_destination, split_by_year, Column, ColumnType,
    Dataset,
};
use crate::error::{Error, Result};
use crate::features::{build_feature_matrix, discretize_dates, FeatureMatrix};

pub const DEFAULT_CUTOFF_YEAR: i32 = 2015;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineOptions {
    pub filter_bookings: bool,
    pub merge_destinations: bool,
    /// Replace each date column by month and year columns; when off, date
    /// columns are dropped.
    pub discretize_dates: bool,
    /// Keep rows dated before this year (the training side of the time
    /// split). `None` keeps every row.
    pub cutoff_year: Option<i32>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            filter_bookings: true,
            merge_destinations: true,
            discretize_dates: true,
            cutoff_year: Some(DEFAULT_CUTOFF_YEAR),
        }
    }
}

/// Unstandardized features of the prepared rows and their hotel clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedData {
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name.into(),
        source: Box::new(e),
    })
}

/// Filter, split by year, impute, merge, discretize, and build features.
///
/// Missing `orig_destination_distance` values are filled with the mean over
/// the kept rows. Errors name the failing stage.
pub fn prepare(
    events: &Dataset,
    destinations: Option<&Dataset>,
    opts: &PipelineOptions,
) -> Result<PreparedData> {
    let mut ds = if opts.filter_bookings {
        stage("filter", filter_bookings(events))?
    } else {
        events.clone()
    };
    if let Some(year) = opts.cutoff_year {
        ds = stage("split", split_by_year(&ds, year))?.train;
    }
    ds = stage("impute", impute_distance(&ds, &[&ds])).map(|mut v| v.remove(0))?;
    if opts.merge_destinations {
        let dest = destinations.ok_or_else(|| Error::Stage {
            stage: "merge".into(),
            source: Box::new(Error::arg("destination merge requested without a destinations table")),
        })?;
        ds = stage("merge", merge_on_destination(&ds, dest))?;
    }
    ds = if opts.discretize_dates {
        stage("discretize", discretize_dates(&ds))?
    } else {
        stage("discretize", drop_dates(&ds))?
    };
    let (features, labels) = stage("features", build_feature_matrix(&ds, HOTEL_CLUSTER, false))?;
    Ok(PreparedData { features, labels })
}

fn drop_dates(ds: &Dataset) -> Result<Dataset> {
    let keep: Vec<Column> = ds
        .columns()
        .iter()
        .filter(|c| {
            !([DATE_TIME, SRCH_CI, SRCH_CO].contains(&c.name.as_str())
                || c.data.ty() == ColumnType::Timestamp)
        })
        .cloned()
        .collect();
    Dataset::new(keep)
}
