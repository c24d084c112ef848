//! Loading, validating, joining, filtering, splitting and sampling the event
//! and destination tables.

mod csv_io;
mod dataset;
mod ops;
pub mod schema;

pub use csv_io::{
    load_destinations, load_events, load_table, read_destinations, read_events,
    read_table_with_specs, write_csv, write_csv_to,
};
pub use dataset::{Column, ColumnData, ColumnSpec, ColumnType, Dataset};
pub use ops::{
    column_mean, fill_missing, filter_bookings, impute_distance, merge_on_destination,
    sample_indices, sample_rows, split_by_year, DataSplit,
};
pub use schema::{EventSchema, LATENT_COUNT};
