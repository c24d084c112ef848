//! Multi-class tabular learning for hotel-cluster prediction: columnar data
//! loading and joins, feature preparation, k-means label coarsening, five
//! classifier families, bagging and AdaBoost ensembles, and a seeded
//! cross-validation harness.

pub mod classifiers;
pub mod coarsen;
pub mod data;
pub mod ensembles;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod pipeline;
pub mod rng;

pub use classifiers::{Classifier, ProbabilisticClassifier};
pub use coarsen::{KMeansModel, LabelCoarsener};
pub use data::{Dataset, EventSchema};
pub use error::{Error, Result};
pub use eval::{ExperimentConfig, MetricsReport};
pub use features::FeatureMatrix;
pub use model::{ModelFile, TrainedModel};
