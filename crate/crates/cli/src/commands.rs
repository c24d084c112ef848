use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hotelcluster::coarsen::{crosstab, write_crosstab_csv, LabelCoarsener};
use hotelcluster::data::schema::is_latent_name;
use hotelcluster::data::{load_destinations, load_events, write_csv, Dataset, EventSchema};
use hotelcluster::eval::{fit_cell, run_experiment_matrix, synthesize, MetricsReport};
use hotelcluster::features::{class_histogram, correlation_matrix, write_correlation_csv, write_histogram_csv};
use hotelcluster::model::{Artifact, ModelFile};
use hotelcluster::pipeline::{prepare, PreparedData};
use hotelcluster::Error;

use crate::config::RunConfig;

/// A failure after validation, tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageFailure {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

type Result<T> = std::result::Result<T, StageFailure>;

fn at<T>(stage: &'static str, r: hotelcluster::Result<T>) -> Result<T> {
    r.map_err(|source| StageFailure { stage, source })
}

fn create(stage: &'static str, path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| StageFailure {
            stage,
            source: Error::Io {
                path: path.to_path_buf(),
                source: e,
            },
        })
}

fn finish(stage: &'static str, path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| StageFailure {
        stage,
        source: Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })
}

fn make_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| StageFailure {
        stage: "output",
        source: Error::Io {
            path: dir.to_path_buf(),
            source: e,
        },
    })
}

/// Events and destinations, loaded from disk or generated in memory.
fn source_tables(cfg: &RunConfig) -> Result<(Dataset, Option<Dataset>)> {
    if let Some(s) = &cfg.synthetic {
        let (events, dest) = at("synthesize", synthesize(&s.params(cfg.seed)))?;
        return Ok((events, Some(dest)));
    }
    let input = cfg.input.as_ref().expect("validated: input present");
    let events = at("load", load_events(&input.events, &EventSchema::default()))?;
    let dest = match &input.destinations {
        Some(p) => Some(at("load", load_destinations(p))?),
        None => None,
    };
    Ok((events, dest))
}

fn prepared(cfg: &RunConfig) -> Result<PreparedData> {
    let (events, dest) = source_tables(cfg)?;
    at("prepare", prepare(&events, dest.as_ref(), &cfg.pipeline))
}

pub fn synthesize_cmd(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let block = cfg.synthetic.as_ref().expect("validated: synthetic present");
    let (events, dest) = at("synthesize", synthesize(&block.params(cfg.seed)))?;
    let dir = cfg.output_dir();
    make_dir(dir)?;
    let (ep, dp) = (dir.join("events.csv"), dir.join("destinations.csv"));
    at("write", write_csv(&events, &ep))?;
    at("write", write_csv(&dest, &dp))?;
    Ok(vec![ep, dp])
}

/// Correlation matrix, class histogram, and crosstabs pairing the finest
/// labelling with the coarsest k-means level: the original clusters against
/// the smallest k, and every larger k against the smallest k.
pub fn analyze_cmd(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = prepared(cfg)?;
    let features = if cfg.analysis.use_destinations {
        data.features.clone()
    } else {
        data.features.select_features(|n| !is_latent_name(n))
    };
    let dir = cfg.output_dir();
    make_dir(dir)?;
    let mut written = Vec::new();

    let corr = at("correlation", correlation_matrix(&features))?;
    let path = dir.join("correlation.csv");
    let mut w = create("write", &path)?;
    at("write", write_correlation_csv(&corr, &mut w))?;
    finish("write", &path, w)?;
    written.push(path);

    let hist = at("histogram", class_histogram(&data.labels))?;
    let path = dir.join("histogram.csv");
    let mut w = create("write", &path)?;
    at("write", write_histogram_csv(&hist, &mut w))?;
    finish("write", &path, w)?;
    written.push(path);

    let mut levels = cfg.analysis.coarsening.clone();
    levels.sort_unstable();
    levels.dedup();
    let mut coarse = Vec::with_capacity(levels.len());
    for &k in &levels {
        let (coarsener, labels) = at("coarsen", LabelCoarsener::fit(&features, k, cfg.seed))?;
        let path = dir.join(format!("kmeans_k{k}.json"));
        at("write", ModelFile::new(Artifact::KMeans(coarsener.model)).save(&path))?;
        written.push(path);
        coarse.push(labels);
    }
    let base = levels[0];
    let mut pairs = vec![("raw".to_string(), &data.labels)];
    for (k, labels) in levels.iter().zip(&coarse).skip(1) {
        pairs.push((k.to_string(), labels));
    }
    for (name, labels) in pairs {
        let table = at("crosstab", crosstab(labels, &coarse[0]))?;
        let path = dir.join(format!("crosstab_{name}_vs_{base}.csv"));
        let mut w = create("write", &path)?;
        at("write", write_crosstab_csv(&table, &mut w))?;
        finish("write", &path, w)?;
        written.push(path);
    }
    Ok(written)
}

fn model_file_name(index: usize, row: &hotelcluster::eval::CellResult) -> String {
    let c = &row.config;
    let params: Vec<String> = c.algorithm.params().iter().map(|(_, v)| v.clone()).collect();
    let protocol = match c.protocol {
        hotelcluster::eval::Protocol::CrossValidation { folds } => format!("cv{folds}"),
        hotelcluster::eval::Protocol::Holdout { .. } => "holdout".into(),
    };
    format!(
        "{index:03}_{}_k{}_{}_{protocol}.json",
        c.algorithm.id(),
        c.cluster_label(),
        params.join("-")
    )
}

/// Run the grid and write `report.csv`, `report.txt`, `timings.csv` and a
/// model file per successful cell under `models/`.
pub fn experiment_cmd(cfg: &RunConfig) -> Result<(MetricsReport, Vec<PathBuf>)> {
    let data = prepared(cfg)?;
    let grid = cfg.cells();
    let report = at(
        "experiment",
        run_experiment_matrix(&grid, &data.features, &data.labels, cfg.workers),
    )?;
    let dir = cfg.output_dir();
    make_dir(dir)?;
    let mut written = Vec::new();

    let path = dir.join("report.csv");
    let mut w = create("write", &path)?;
    at("write", report.write_csv(&mut w))?;
    finish("write", &path, w)?;
    written.push(path);

    let path = dir.join("report.txt");
    let mut w = create("write", &path)?;
    w.write_all(report.to_text().as_bytes()).map_err(|e| StageFailure {
        stage: "write",
        source: Error::Io {
            path: path.clone(),
            source: e,
        },
    })?;
    finish("write", &path, w)?;
    written.push(path);

    let path = dir.join("timings.csv");
    let mut w = create("write", &path)?;
    at("write", report.write_timings_csv(&mut w))?;
    finish("write", &path, w)?;
    written.push(path);

    let models = dir.join("models");
    make_dir(&models)?;
    for (i, row) in report.rows.iter().enumerate().filter(|(_, r)| r.is_ok()) {
        let (x, y) = at("final-fit", row.config.select_rows(&data.features, &data.labels))?;
        let model = at("final-fit", fit_cell(&row.config, &x, &y))?;
        let path = models.join(model_file_name(i, row));
        at("write", ModelFile::new(Artifact::Classifier(model)).save(&path))?;
        written.push(path);
    }
    Ok((report, written))
}
