//! CSV reading and writing.
//!
//! Dialect: comma delimited, header on the first line, optional double-quote
//! quoting, UTF-8. Empty cells are missing values.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::dataset::{Column, ColumnData, ColumnSpec, ColumnType, Dataset};
use super::schema::{self, CellRule, EventSchema, LATENT_COUNT, SRCH_DESTINATION_ID};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn load_events(path: impl AsRef<Path>, schema: &EventSchema) -> Result<Dataset> {
    read_events(open(path.as_ref())?, schema)
}

/// Parse an event log. Columns keep the file's header order; the header may
/// list the schema columns in any order.
pub fn read_events<R: Read>(reader: R, schema: &EventSchema) -> Result<Dataset> {
    read_table(
        reader,
        |header| {
            let mut out = Vec::with_capacity(header.len());
            for name in header {
                let field = schema
                    .field(name)
                    .ok_or_else(|| Error::schema(format!("unexpected column `{name}`")))?;
                out.push((field.spec.clone(), field.rule));
            }
            for f in schema.fields.iter().filter(|f| f.required) {
                if !header.contains(&f.spec.name) {
                    return Err(Error::schema(format!("missing column `{}`", f.spec.name)));
                }
            }
            Ok(out)
        },
        &schema.specs(),
    )
}

pub fn load_destinations(path: impl AsRef<Path>) -> Result<Dataset> {
    read_destinations(open(path.as_ref())?)
}

/// Parse the destinations table and verify key uniqueness.
pub fn read_destinations<R: Read>(reader: R) -> Result<Dataset> {
    let ds = read_table(
        reader,
        |header| {
            if !header.iter().any(|h| h == SRCH_DESTINATION_ID) {
                return Err(Error::schema(format!("missing column `{SRCH_DESTINATION_ID}`")));
            }
            let mut out = Vec::with_capacity(header.len());
            let mut latent = 0;
            for name in header {
                if name == SRCH_DESTINATION_ID {
                    out.push((
                        ColumnSpec::new(name.clone(), ColumnType::Categorical, false),
                        CellRule::Any,
                    ));
                } else if schema::is_latent_name(name) {
                    latent += 1;
                    out.push((ColumnSpec::new(name.clone(), ColumnType::Real, false), CellRule::Any));
                } else {
                    return Err(Error::schema(format!("unexpected column `{name}`")));
                }
            }
            if latent != LATENT_COUNT {
                return Err(Error::schema(format!(
                    "expected {LATENT_COUNT} latent columns (d1..d{LATENT_COUNT}), found {latent}"
                )));
            }
            for i in 1..=LATENT_COUNT {
                let name = schema::latent_name(i);
                if !header.contains(&name) {
                    return Err(Error::schema(format!("missing column `{name}`")));
                }
            }
            Ok(out)
        },
        &schema::destination_specs(),
    )?;
    let keys = ds.require(SRCH_DESTINATION_ID)?;
    let mut seen = HashSet::with_capacity(ds.n_rows());
    for row in 0..ds.n_rows() {
        let key = keys.data.get_i64(row).expect("key column is non-nullable");
        if !seen.insert(key) {
            return Err(Error::Integrity(format!(
                "duplicate {SRCH_DESTINATION_ID} {key}"
            )));
        }
    }
    Ok(ds)
}

pub fn load_table(path: impl AsRef<Path>, specs: &[ColumnSpec]) -> Result<Dataset> {
    read_table_with_specs(open(path.as_ref())?, specs)
}

/// Parse a CSV whose header names exactly the columns in `specs` (any order).
pub fn read_table_with_specs<R: Read>(reader: R, specs: &[ColumnSpec]) -> Result<Dataset> {
    let by_name: HashMap<&str, &ColumnSpec> = specs.iter().map(|s| (s.name.as_str(), s)).collect();
    read_table(
        reader,
        |header| {
            for s in specs {
                if !header.contains(&s.name) {
                    return Err(Error::schema(format!("missing column `{}`", s.name)));
                }
            }
            header
                .iter()
                .map(|h| {
                    by_name
                        .get(h.as_str())
                        .map(|s| ((*s).clone(), CellRule::Any))
                        .ok_or_else(|| Error::schema(format!("unexpected column `{h}`")))
                })
                .collect()
        },
        specs,
    )
}

fn read_table<R, F>(reader: R, resolve: F, empty_specs: &[ColumnSpec]) -> Result<Dataset>
where
    R: Read,
    F: FnOnce(&[String]) -> Result<Vec<(ColumnSpec, CellRule)>>,
{
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Dataset::empty(empty_specs);
    }
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::schema(format!("duplicate column `{h}`")));
        }
    }
    let layout = resolve(&header)?;
    let mut columns: Vec<ColumnData> = layout.iter().map(|(s, _)| ColumnData::empty(s.ty)).collect();

    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        for (j, ((spec, rule), col)) in layout.iter().zip(columns.iter_mut()).enumerate() {
            let cell = record.get(j).unwrap_or("").trim();
            push_cell(col, cell, spec, *rule).map_err(|message| Error::Row {
                line,
                column: spec.name.clone(),
                message,
            })?;
        }
    }
    Dataset::new(
        layout
            .into_iter()
            .zip(columns)
            .map(|((spec, _), data)| Column::new(spec.name, data))
            .collect(),
    )
}

fn push_cell(
    col: &mut ColumnData,
    cell: &str,
    spec: &ColumnSpec,
    rule: CellRule,
) -> std::result::Result<(), String> {
    if cell.is_empty() {
        if !spec.nullable {
            return Err("missing value in non-nullable column".into());
        }
        match col {
            ColumnData::Integer(v) | ColumnData::Categorical(v) => v.push(None),
            ColumnData::Real(v) => v.push(None),
            ColumnData::Timestamp(v) => v.push(None),
        }
        return Ok(());
    }
    match col {
        ColumnData::Integer(v) | ColumnData::Categorical(v) => {
            let x: i64 = cell
                .parse()
                .map_err(|_| format!("cannot parse `{cell}` as integer"))?;
            if let Some(msg) = rule.check(&spec.name, x) {
                return Err(msg);
            }
            v.push(Some(x));
        }
        ColumnData::Real(v) => {
            let x: f64 = cell
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| format!("cannot parse `{cell}` as a finite real"))?;
            v.push(Some(x));
        }
        ColumnData::Timestamp(v) => {
            let t = schema::parse_timestamp(cell)
                .ok_or_else(|| format!("cannot parse `{cell}` as a date"))?;
            v.push(Some(t));
        }
    }
    Ok(())
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(dataset, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Serialize in the same dialect the loaders accept. Reals use the shortest
/// representation that parses back to the same bits.
pub fn write_csv_to<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if dataset.n_cols() == 0 {
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        return Ok(());
    }
    w.write_record(dataset.names())?;
    let mut row = Vec::with_capacity(dataset.n_cols());
    for i in 0..dataset.n_rows() {
        row.clear();
        for c in dataset.columns() {
            row.push(format_cell(&c.data, i));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn format_cell(col: &ColumnData, i: usize) -> String {
    match col {
        ColumnData::Integer(v) | ColumnData::Categorical(v) => v[i].map(|x| x.to_string()),
        ColumnData::Real(v) => v[i].map(|x| x.to_string()),
        ColumnData::Timestamp(v) => v[i].as_ref().map(schema::format_timestamp),
    }
    .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "date_time,site_name,posa_continent,user_location_country,user_location_region,user_location_city,orig_destination_distance,user_id,is_mobile,is_package,channel,srch_ci,srch_co,srch_adults_cnt,srch_children_cnt,srch_rm_cnt,srch_destination_id,srch_destination_type_id,is_booking,cnt,hotel_continent,hotel_country,hotel_market,hotel_cluster";

    fn events(rows: &[&str]) -> Result<Dataset> {
        let text = std::iter::once(HEADER).chain(rows.iter().copied()).collect::<Vec<_>>().join("\n");
        read_events(text.as_bytes(), &EventSchema::default())
    }

    const ROW1: &str = "2014-08-11 07:46:59,2,3,66,348,48862,2234.2641,12,0,1,9,2014-08-27,2014-08-31,2,0,1,8250,1,0,3,2,50,628,1";
    const ROW2: &str = "2014-08-11 08:22:12,2,3,66,348,48862,,12,0,1,9,2014-08-29,2014-09-02,2,0,1,8250,1,1,1,2,50,628,1";
    const ROW3: &str = "2015-01-09 12:00:00,2,3,66,442,35390,913.1932,93,0,0,3,2015-11-23,2015-11-28,2,0,1,14984,1,0,1,2,50,1457,80";

    #[test]
    fn three_valid_rows() {
        let ds = events(&[ROW1, ROW2, ROW3]).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_cols(), 24);
        // header order is preserved
        assert_eq!(ds.columns()[18].name, "is_booking");
        let dist = &ds.column("orig_destination_distance").unwrap().data;
        assert_eq!(dist.get_f64(0), Some(2234.2641));
        assert!(dist.is_missing(1));
        assert_eq!(dist.get_f64(2), Some(913.1932));
        assert_eq!(ds.column("date_time").unwrap().data.ty(), ColumnType::Timestamp);
    }

    #[test]
    fn flag_violation_cites_line_and_invariant() {
        let bad = ROW2.replacen(",1,1,2,50,628,1", ",2,1,2,50,628,1", 1);
        let err = events(&[ROW1, &bad]).unwrap_err();
        match err {
            Error::Row { line, column, message } => {
                assert_eq!(line, 3);
                assert_eq!(column, "is_booking");
                assert!(message.contains("is_booking ∈ {0,1}"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_month_is_a_row_error() {
        let bad = ROW1.replace("2014-08-27", "2016-13-01");
        assert!(matches!(events(&[&bad]), Err(Error::Row { line: 2, ref column, .. }) if column == "srch_ci"));
    }

    #[test]
    fn missing_and_extra_columns() {
        let text = HEADER.replace(",cnt", "");
        let err = read_events(text.as_bytes(), &EventSchema::default()).unwrap_err();
        assert!(err.to_string().contains("`cnt`"), "{err}");
        let text = format!("{HEADER},bogus");
        let err = read_events(text.as_bytes(), &EventSchema::default()).unwrap_err();
        assert!(err.to_string().contains("`bogus`"), "{err}");
    }

    #[test]
    fn label_column_is_optional() {
        let header = HEADER.replace(",hotel_cluster", "");
        let row = ROW1.rsplit_once(',').unwrap().0;
        let ds = read_events(format!("{header}\n{row}").as_bytes(), &EventSchema::default()).unwrap();
        assert_eq!(ds.n_cols(), 23);
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let ds = read_events("".as_bytes(), &EventSchema::default()).unwrap();
        assert_eq!(ds.n_rows(), 0);
        assert_eq!(ds.n_cols(), 24);
        let ds = events(&[]).unwrap();
        assert_eq!(ds.n_rows(), 0);
    }

    fn destinations(ids: &[i64], latent: usize) -> String {
        let mut s = String::from("srch_destination_id");
        for i in 1..=latent {
            s.push_str(&format!(",d{i}"));
        }
        for id in ids {
            s.push_str(&format!("\n{id}"));
            for i in 1..=latent {
                s.push_str(&format!(",-{}.5", i % 7));
            }
        }
        s
    }

    #[test]
    fn destinations_ok_duplicate_and_width() {
        let ds = read_destinations(destinations(&[7, 9], 149).as_bytes()).unwrap();
        assert_eq!((ds.n_rows(), ds.n_cols()), (2, 150));
        let err = read_destinations(destinations(&[7, 7], 149).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Integrity(ref m) if m.contains('7')));
        let err = read_destinations(destinations(&[7], 148).as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema(ref m) if m.contains("expected 149")), "{err}");
    }

    #[test]
    fn write_then_read_events() {
        let ds = events(&[ROW1, ROW2, ROW3]).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = read_events(buf.as_slice(), &EventSchema::default()).unwrap();
        assert_eq!(back, ds);
    }
}
