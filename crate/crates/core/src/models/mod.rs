//! LDA, random-forest and MLP intent classifiers trained on standardized
//! window features, plus held-out evaluation.

mod eval;
mod lda;
mod mlp;
mod rf;

pub use eval::{evaluate, EvalReport};
pub use lda::{LdaModel, LdaParams};
pub use mlp::{Mlp, MlpParams};
pub use rf::{Forest, RfParams, Tree};

use crate::features::{FeatureError, FeatureMatrix, Standardizer};
use crate::session::Label;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Version tag written into saved model documents.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("training data has {0} class(es); at least 2 are required")]
    InsufficientClasses(usize),
    #[error("class {label} has {rows} row(s); at least {needed} are required")]
    InsufficientClassRows { label: Label, rows: usize, needed: usize },
    #[error("pooled covariance is singular even after ridge regularization")]
    SingularCovariance,
    #[error("training loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("train and test rows come from the same session ({0}); use distinct sessions")]
    SameSession(String),
    #[error("unsupported model document version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lda,
    Rf,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lda, ModelKind::Rf, ModelKind::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Rf => "rf",
            ModelKind::Mlp => "mlp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str().to_uppercase())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(ModelKind::Lda),
            "rf" => Ok(ModelKind::Rf),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(format!("unknown model kind {other:?} (expected lda, rf or mlp)")),
        }
    }
}

/// Which windows take part in training and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassMode {
    /// Rest windows are a class of their own.
    #[default]
    WithRest,
    /// Rest windows are dropped; only gesture classes remain.
    GesturesOnly,
}

impl ClassMode {
    pub fn apply(self, m: &FeatureMatrix) -> FeatureMatrix {
        match self {
            ClassMode::WithRest => m.clone(),
            ClassMode::GesturesOnly => m.filter_labels(|l| l != Label::Relax),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Lda(LdaModel),
    Rf(Forest),
    Mlp(Mlp),
}

/// A fitted classifier bundled with the standardizer fitted on its
/// training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub class_set: Vec<Label>,
    pub schema: Vec<String>,
    pub standardizer: Standardizer,
    pub seed: u64,
    /// Session the training rows came from.
    pub source: String,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Lda(_) => ModelKind::Lda,
            ModelParams::Rf(_) => ModelKind::Rf,
            ModelParams::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Class index into `class_set` for an already-standardized row.
    pub fn predict_standardized(&self, row: &[f64]) -> usize {
        match &self.params {
            ModelParams::Lda(m) => m.predict(row),
            ModelParams::Rf(m) => m.predict(row),
            ModelParams::Mlp(m) => m.predict(row),
        }
    }

    pub fn predict_row(&self, raw: &[f64]) -> Label {
        let mut row = raw.to_vec();
        self.standardizer.transform_row(&mut row);
        self.class_set[self.predict_standardized(&row)]
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Result<Vec<Label>, ModelError> {
        self.check_schema(m)?;
        let z = self.standardizer.apply(m)?;
        Ok(z.iter_rows().map(|r| self.class_set[self.predict_standardized(r)]).collect())
    }

    pub fn check_schema(&self, m: &FeatureMatrix) -> Result<(), ModelError> {
        if m.schema != self.schema {
            return Err(ModelError::SchemaMismatch(format!(
                "model expects {} columns [{}...], data has {} [{}...]",
                self.schema.len(),
                self.schema.first().map_or("", String::as_str),
                m.schema.len(),
                m.schema.first().map_or("", String::as_str)
            )));
        }
        Ok(())
    }

    /// Hyperparameters as display strings, for report provenance.
    pub fn hyperparameters(&self) -> Vec<(String, String)> {
        match &self.params {
            ModelParams::Lda(m) => vec![("ridge_scale".into(), m.params.ridge_scale.to_string())],
            ModelParams::Rf(m) => vec![
                ("trees".into(), m.params.trees.to_string()),
                ("max_features".into(), m.max_features.to_string()),
                ("min_leaf".into(), m.params.min_leaf.to_string()),
            ],
            ModelParams::Mlp(m) => vec![
                ("hidden".into(), m.params.hidden.to_string()),
                ("epochs".into(), m.params.epochs.to_string()),
                ("learning_rate".into(), m.params.learning_rate.to_string()),
                ("batch_size".into(), m.params.batch_size.to_string()),
            ],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let version = v.get("format_version").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
        if version != MODEL_FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(version));
        }
        serde_json::from_value(v).map_err(|e| ModelError::Malformed(e.to_string()))
    }
}

/// Standardized training rows with class indices.
pub(crate) struct Prepared {
    pub x: Vec<f64>,
    pub d: usize,
    pub y: Vec<usize>,
    pub classes: Vec<Label>,
    pub standardizer: Standardizer,
}

impl Prepared {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }
}

pub(crate) fn prepare(train: &FeatureMatrix, min_rows_per_class: usize) -> Result<Prepared, ModelError> {
    let mut classes: Vec<Label> = train.labels.clone();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(ModelError::InsufficientClasses(classes.len()));
    }
    for &c in &classes {
        let rows = train.labels.iter().filter(|&&l| l == c).count();
        if rows < min_rows_per_class {
            return Err(ModelError::InsufficientClassRows { label: c, rows, needed: min_rows_per_class });
        }
    }
    let standardizer = Standardizer::fit(train)?;
    let z = standardizer.apply(train)?;
    let x: Vec<f64> = z.iter_rows().flatten().copied().collect();
    let y = train.labels.iter().map(|l| classes.binary_search(l).expect("label in class set")).collect();
    Ok(Prepared { x, d: train.width(), y, classes, standardizer })
}

fn wrap(train: &FeatureMatrix, p: Prepared, seed: u64, params: ModelParams) -> TrainedModel {
    TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        class_set: p.classes,
        schema: train.schema.clone(),
        standardizer: p.standardizer,
        seed,
        source: train.source.clone(),
        params,
    }
}

pub fn fit_lda(train: &FeatureMatrix, params: &LdaParams) -> Result<TrainedModel, ModelError> {
    let p = prepare(train, 2)?;
    let m = LdaModel::fit(&p, params)?;
    Ok(wrap(train, p, 0, ModelParams::Lda(m)))
}

pub fn fit_rf(train: &FeatureMatrix, params: &RfParams, seed: u64) -> Result<TrainedModel, ModelError> {
    let p = prepare(train, 1)?;
    let m = Forest::fit(&p, params, seed);
    Ok(wrap(train, p, seed, ModelParams::Rf(m)))
}

pub fn fit_mlp(train: &FeatureMatrix, params: &MlpParams, seed: u64) -> Result<TrainedModel, ModelError> {
    let p = prepare(train, 1)?;
    let m = Mlp::fit(&p, params, seed)?;
    Ok(wrap(train, p, seed, ModelParams::Mlp(m)))
}

/// Fits the requested model kind with the configured hyperparameters.
pub fn fit(
    kind: ModelKind,
    train: &FeatureMatrix,
    config: &crate::config::ModelConfig,
    seed: u64,
) -> Result<TrainedModel, ModelError> {
    match kind {
        ModelKind::Lda => fit_lda(train, &config.lda),
        ModelKind::Rf => fit_rf(train, &config.rf, seed),
        ModelKind::Mlp => fit_mlp(train, &config.mlp, seed),
    }
}

/// Index of the largest score; ties resolve to the lowest index.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in scores.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
