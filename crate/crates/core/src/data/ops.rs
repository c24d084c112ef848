//! Relational transforms over event and destination tables.

use std::collections::HashMap;

use chrono::Datelike;
use rand::seq::index;

use super::dataset::{Column, ColumnData, Dataset};
use super::schema::{self, DATE_TIME, IS_BOOKING, SRCH_DESTINATION_ID};
use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// Keep only booking events (`is_booking = 1`), preserving row order.
pub fn filter_bookings(events: &Dataset) -> Result<Dataset> {
    let col = events.require(IS_BOOKING)?;
    if !matches!(col.data, ColumnData::Integer(_) | ColumnData::Categorical(_)) {
        return Err(Error::schema(format!("`{IS_BOOKING}` must be an integer column")));
    }
    let keep: Vec<usize> = (0..events.n_rows())
        .filter(|&i| col.data.get_i64(i) == Some(1))
        .collect();
    Ok(events.take_rows(&keep))
}

/// Left-join the destination latents onto the events by `srch_destination_id`.
///
/// Events whose destination is absent from the table receive the per-column
/// mean of the destinations table (zero when the table is empty).
pub fn merge_on_destination(events: &Dataset, destinations: &Dataset) -> Result<Dataset> {
    let event_keys = &events.require(SRCH_DESTINATION_ID)?.data;
    let dest_keys = &destinations.require(SRCH_DESTINATION_ID)?.data;
    let latents: Vec<&Column> = destinations
        .columns()
        .iter()
        .filter(|c| c.name != SRCH_DESTINATION_ID)
        .collect();

    let mut lookup = HashMap::with_capacity(destinations.n_rows());
    for r in 0..destinations.n_rows() {
        if let Some(k) = dest_keys.get_i64(r) {
            lookup.entry(k).or_insert(r);
        }
    }

    let mut out = events.columns().to_vec();
    for latent in latents {
        let values: Vec<f64> = (0..destinations.n_rows())
            .filter_map(|r| latent.data.get_f64(r))
            .collect();
        let mean = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        let merged = (0..events.n_rows())
            .map(|i| {
                let hit = event_keys.get_i64(i).and_then(|k| lookup.get(&k));
                Some(hit.and_then(|&r| latent.data.get_f64(r)).unwrap_or(mean))
            })
            .collect();
        out.push(Column::new(latent.name.clone(), ColumnData::Real(merged)));
    }
    Dataset::new(out)
}

/// Train/test partition by calendar year of `date_time`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub cutoff_year: i32,
}

/// Rows dated before `cutoff_year` go to train; the cutoff year itself and
/// later go to test.
pub fn split_by_year(events: &Dataset, cutoff_year: i32) -> Result<DataSplit> {
    let years = timestamp_years(events, DATE_TIME)?;
    let (train, test): (Vec<usize>, Vec<usize>) =
        (0..events.n_rows()).partition(|&i| years[i] < cutoff_year);
    Ok(DataSplit {
        train: events.take_rows(&train),
        test: events.take_rows(&test),
        cutoff_year,
    })
}

fn timestamp_years(ds: &Dataset, name: &str) -> Result<Vec<i32>> {
    match &ds.require(name)?.data {
        ColumnData::Timestamp(v) => v
            .iter()
            .map(|t| {
                t.map(|t| t.year())
                    .ok_or_else(|| Error::schema(format!("`{name}` has missing timestamps")))
            })
            .collect(),
        _ => Err(Error::schema(format!("`{name}` is not a parsed timestamp column"))),
    }
}

/// Uniform sample of `n` rows without replacement, kept in original row order.
pub fn sample_rows(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    Ok(dataset.take_rows(&sample_indices(dataset.n_rows(), n, seed)?))
}

/// Sorted indices of a uniform `n`-subset of `0..total`.
pub fn sample_indices(total: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > total {
        return Err(Error::arg(format!("cannot sample {n} rows from {total}")));
    }
    let mut rng = rng::substream(seed, streams::SAMPLE, 0);
    let mut idx = index::sample(&mut rng, total, n).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Mean of the present values of a numeric column.
pub fn column_mean(dataset: &Dataset, name: &str) -> Result<Option<f64>> {
    let col = &dataset.require(name)?.data;
    if col.ty() == super::ColumnType::Timestamp {
        return Err(Error::schema(format!("`{name}` is not numeric")));
    }
    let (sum, count) = (0..dataset.n_rows())
        .filter_map(|i| col.get_f64(i))
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    Ok((count > 0).then(|| sum / count as f64))
}

/// Replace missing cells of a real column with `value`.
pub fn fill_missing(dataset: &Dataset, name: &str, value: f64) -> Result<Dataset> {
    let idx = dataset
        .column_index(name)
        .ok_or_else(|| Error::schema(format!("missing column `{name}`")))?;
    let mut columns = dataset.columns().to_vec();
    match &mut columns[idx].data {
        ColumnData::Real(v) => v.iter_mut().filter(|x| x.is_none()).for_each(|x| *x = Some(value)),
        _ => return Err(Error::schema(format!("`{name}` is not a real column"))),
    }
    Dataset::new(columns)
}

/// Fill missing `orig_destination_distance` with its mean over `reference`
/// (the training split), applied to each dataset in `targets`.
pub fn impute_distance(reference: &Dataset, targets: &[&Dataset]) -> Result<Vec<Dataset>> {
    let mean = column_mean(reference, schema::ORIG_DESTINATION_DISTANCE)?.unwrap_or(0.0);
    targets
        .iter()
        .map(|d| fill_missing(d, schema::ORIG_DESTINATION_DISTANCE, mean))
        .collect()
}
