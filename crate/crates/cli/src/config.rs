//! The JSON run configuration and its validation.

use std::path::{Path, PathBuf};

use hotelcluster::eval::{table_grid, ExperimentConfig, TablePreset, SynthParams};
use hotelcluster::pipeline::PipelineOptions;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub events: PathBuf,
    /// Required when the pipeline merges destinations.
    #[serde(default)]
    pub destinations: Option<PathBuf>,
}

/// Generation parameters; the seed comes from the run's global seed.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticBlock {
    pub n_events: usize,
    #[serde(default = "default_clusters")]
    pub n_hotel_clusters: usize,
    #[serde(default = "default_separation")]
    pub cluster_separation: f64,
    #[serde(default = "default_booking_rate")]
    pub booking_rate: f64,
    #[serde(default = "default_destinations")]
    pub n_destinations: usize,
}

fn default_clusters() -> usize {
    SynthParams::default().n_hotel_clusters
}
fn default_separation() -> f64 {
    SynthParams::default().cluster_separation
}
fn default_booking_rate() -> f64 {
    SynthParams::default().booking_rate
}
fn default_destinations() -> usize {
    SynthParams::default().n_destinations
}

impl SyntheticBlock {
    pub fn params(&self, seed: u64) -> SynthParams {
        SynthParams {
            n_events: self.n_events,
            n_hotel_clusters: self.n_hotel_clusters,
            cluster_separation: self.cluster_separation,
            booking_rate: self.booking_rate,
            n_destinations: self.n_destinations,
            seed,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    /// k-means levels to cross-tabulate.
    #[serde(default = "default_levels")]
    pub coarsening: Vec<usize>,
    #[serde(default = "yes")]
    pub use_destinations: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            coarsening: default_levels(),
            use_destinations: true,
        }
    }
}

fn default_levels() -> Vec<usize> {
    vec![5, 10]
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Named preset grids (`table3` ... `table7`).
    #[serde(default)]
    pub presets: Vec<TablePreset>,
    /// Additional explicit cells.
    #[serde(default)]
    pub cells: Vec<ExperimentConfig>,
    /// Overrides the destination-latent switch of every cell.
    #[serde(default)]
    pub use_destinations: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub input: Option<InputPaths>,
    #[serde(default)]
    pub synthetic: Option<SyntheticBlock>,
    #[serde(default)]
    pub pipeline: PipelineOptions,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for the experiment matrix; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Experiment,
    Synthesize,
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
    }

    /// Every cell of the experiment grid, carrying the global seed.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out: Vec<ExperimentConfig> = self
            .grid
            .presets
            .iter()
            .flat_map(|&t| table_grid(t, self.seed))
            .chain(self.grid.cells.iter().cloned())
            .collect();
        for c in &mut out {
            c.seed = self.seed;
            if let Some(d) = self.grid.use_destinations {
                c.use_destinations = d;
            }
        }
        out
    }

    pub fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().unwrap_or(Path::new("."))
    }

    /// Every violated field for `command`, one message each.
    pub fn problems(&self, command: Command) -> Vec<String> {
        let mut out = Vec::new();
        match (&self.input, &self.synthetic, command) {
            (_, None, Command::Synthesize) => out.push("synthetic: block required by `synthesize`".into()),
            (Some(_), Some(_), Command::Synthesize) => {
                out.push("input: must be absent when `synthetic` is present".into())
            }
            (None, None, _) => out.push("input/synthetic: exactly one must be present, found neither".into()),
            (Some(_), Some(_), _) => out.push("input/synthetic: exactly one must be present, found both".into()),
            _ => {}
        }
        if let Some(input) = &self.input {
            if !input.events.is_file() {
                out.push(format!("input.events: no such file {}", input.events.display()));
            }
            match &input.destinations {
                Some(d) if !d.is_file() => {
                    out.push(format!("input.destinations: no such file {}", d.display()));
                }
                None if self.pipeline.merge_destinations && command != Command::Synthesize => {
                    out.push("input.destinations: required when pipeline.merge_destinations is on".into());
                }
                _ => {}
            }
        }
        if let Some(s) = &self.synthetic {
            if let Err(e) = s.params(self.seed).validate() {
                out.push(format!("synthetic: {e}"));
            }
        }
        if command == Command::Analyze {
            if self.analysis.coarsening.is_empty() {
                out.push("analysis.coarsening: at least one level required".into());
            }
            if self.analysis.coarsening.contains(&0) {
                out.push("analysis.coarsening: levels must be ≥ 1".into());
            }
        }
        if command == Command::Experiment {
            let cells = self.cells();
            if cells.is_empty() {
                out.push("grid: no presets or cells".into());
            }
            for (i, c) in cells.iter().enumerate() {
                for p in c.problems() {
                    out.push(format!("grid cell {i} ({}): {p}", c.algorithm.id()));
                }
            }
        }
        if self.output_dir().is_file() {
            out.push(format!("output_dir: {} is a file", self.output_dir().display()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> RunConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn minimal_synthetic_config() {
        let c = parse(r#"{"synthetic":{"n_events":100},"grid":{"presets":["table3"]},"seed":4}"#);
        assert!(c.problems(Command::Experiment).is_empty());
        assert!(c.cells().iter().all(|x| x.seed == 4));
        assert_eq!(c.cells().len(), 5);
    }

    #[test]
    fn every_problem_is_listed() {
        let c = parse(
            r#"{"input":{"events":"/nonexistent.csv"},"synthetic":{"n_events":0},
                "grid":{"cells":[{"algorithm":{"name":"knn","k":0},"coarsening":null,
                "protocol":{"kind":"cross_validation","folds":1}}]}}"#,
        );
        let p = c.problems(Command::Experiment);
        assert!(p.iter().any(|m| m.contains("found both")));
        assert!(p.iter().any(|m| m.contains("input.events")));
        assert!(p.iter().any(|m| m.contains("input.destinations")));
        assert!(p.iter().any(|m| m.contains("n_events")));
        assert!(p.iter().any(|m| m.contains("knn.k")));
        assert!(p.iter().any(|m| m.contains("folds")));
    }

    #[test]
    fn missing_input() {
        let c = parse(r#"{"grid":{"presets":["table5"]}}"#);
        assert_eq!(c.problems(Command::Analyze).len(), 1);
        assert_eq!(c.problems(Command::Synthesize).len(), 1);
    }

    #[test]
    fn overrides() {
        let mut c = parse(r#"{"synthetic":{"n_events":10},"seed":1,"workers":3}"#);
        c.apply(&Overrides {
            seed: Some(9),
            out: Some("x".into()),
            workers: None,
        });
        assert_eq!((c.seed, c.workers), (9, 3));
        assert_eq!(c.output_dir(), Path::new("x"));
    }

    #[test]
    fn bundled_configs_parse() {
        for (name, text) in [
            ("analyze", include_str!("../../../configs/analyze.json")),
            ("files", include_str!("../../../configs/files.json")),
            ("quick", include_str!("../../../configs/quick.json")),
            ("synthesize", include_str!("../../../configs/synthesize.json")),
            ("tables", include_str!("../../../configs/tables.json")),
        ] {
            let c: RunConfig = serde_json::from_str(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let command = match name {
                "analyze" => Command::Analyze,
                "synthesize" => Command::Synthesize,
                _ => Command::Experiment,
            };
            let problems: Vec<String> =
                c.problems(command).into_iter().filter(|p| !p.contains("no such file")).collect();
            assert!(problems.is_empty(), "{name}: {problems:?}");
        }
    }
}
