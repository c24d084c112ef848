//! Trained-model bundle and its versioned JSON file format.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{
    Classifier, DecisionTreeModel, KnnModel, LogisticRegressionModel, NaiveBayesModel,
};
use crate::coarsen::{KMeansModel, LabelCoarsener};
use crate::ensembles::{AdaBoostModel, BaggingModel};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Standardizer};

pub const MODEL_FORMAT: &str = "hotelcluster-model";
pub const MODEL_VERSION: u32 = 1;

/// Any trained classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ClassifierModel {
    NaiveBayes(NaiveBayesModel),
    DecisionTree(DecisionTreeModel),
    Knn(KnnModel),
    LogisticRegression(LogisticRegressionModel),
    Bagging(BaggingModel),
    AdaBoost(AdaBoostModel),
}

impl ClassifierModel {
    fn inner(&self) -> &dyn Classifier {
        match self {
            ClassifierModel::NaiveBayes(m) => m,
            ClassifierModel::DecisionTree(m) => m,
            ClassifierModel::Knn(m) => m,
            ClassifierModel::LogisticRegression(m) => m,
            ClassifierModel::Bagging(m) => m,
            ClassifierModel::AdaBoost(m) => m,
        }
    }
}

impl Classifier for ClassifierModel {
    fn classes(&self) -> &[usize] {
        self.inner().classes()
    }

    fn predict(&self, features: &FeatureMatrix) -> Result<Vec<usize>> {
        self.inner().predict(features)
    }
}

/// Everything needed to go from raw feature rows to a prediction: the label
/// coarsener (if any), the feature standardizer (if any) and the classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub feature_names: Vec<String>,
    pub coarsener: Option<LabelCoarsener>,
    pub standardizer: Option<Standardizer>,
    pub classifier: ClassifierModel,
}

impl TrainedModel {
    /// The columns of `raw` this model was trained on, in training order.
    pub fn select(&self, raw: &FeatureMatrix) -> Result<FeatureMatrix> {
        if raw.names() == self.feature_names.as_slice() {
            return Ok(raw.clone());
        }
        for name in &self.feature_names {
            if !raw.names().contains(name) {
                return Err(Error::arg(format!("input lacks feature `{name}`")));
            }
        }
        let selected = raw.select_features(|n| self.feature_names.iter().any(|f| f == n));
        if selected.names() != self.feature_names.as_slice() {
            return Err(Error::arg("input features are in a different order than in training"));
        }
        Ok(selected)
    }

    /// Targets the classifier is meant to predict for these rows: coarse
    /// cluster labels when a coarsener is present, else `raw_labels`.
    /// `raw` must already be restricted with [`TrainedModel::select`].
    pub fn targets(&self, raw: &FeatureMatrix, raw_labels: &[usize]) -> Result<Vec<usize>> {
        match &self.coarsener {
            Some(c) => c.assign(raw),
            None => Ok(raw_labels.to_vec()),
        }
    }

    /// Predictions for rows already restricted with [`TrainedModel::select`].
    pub fn predict(&self, raw: &FeatureMatrix) -> Result<Vec<usize>> {
        match &self.standardizer {
            Some(s) => self.classifier.predict(&s.apply(raw)?),
            None => self.classifier.predict(raw),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Artifact {
    Classifier(TrainedModel),
    KMeans(KMeansModel),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub artifact: Artifact,
}

impl ModelFile {
    pub fn new(artifact: Artifact) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            artifact,
        }
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.to_writer(&mut out)?;
        Ok(out)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(reader)?;
        match value.get("format").and_then(|v| v.as_str()) {
            Some(MODEL_FORMAT) => {}
            other => {
                return Err(Error::ModelFormat(format!(
                    "expected format `{MODEL_FORMAT}`, found {other:?}"
                )))
            }
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            other => {
                return Err(Error::ModelFormat(format!(
                    "unsupported version {other:?} (this build reads {MODEL_VERSION})"
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.to_writer(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file))
    }
}
