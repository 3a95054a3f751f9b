use super::{ModelError, ModelKind, TrainedModel};
use crate::features::FeatureMatrix;
use crate::session::Label;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: ModelKind,
    /// Classes indexing the confusion matrix: the model's classes plus any
    /// extra labels seen only in the test rows.
    pub classes: Vec<Label>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub rows: usize,
    pub hyperparameters: Vec<(String, String)>,
    pub seed: u64,
    pub train_source: String,
    pub test_source: String,
}

impl EvalReport {
    pub fn from_predictions(model: &TrainedModel, truth: &[Label], predicted: &[Label], test_source: &str) -> Self {
        let mut classes = model.class_set.clone();
        classes.extend(truth.iter().copied());
        classes.sort();
        classes.dedup();
        let k = classes.len();
        let idx = |l: &Label| classes.binary_search(l).expect("label indexed");
        let mut confusion = vec![vec![0u64; k]; k];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[idx(t)][idx(p)] += 1;
        }
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = (0..k).map(|j| ratio(confusion[j][j], (0..k).map(|i| confusion[i][j]).sum())).collect();
        let recall = (0..k).map(|i| ratio(confusion[i][i], confusion[i].iter().sum())).collect();
        EvalReport {
            model: model.kind(),
            classes,
            confusion,
            accuracy: ratio(trace, total),
            precision,
            recall,
            rows: truth.len(),
            hyperparameters: model.hyperparameters(),
            seed: model.seed,
            train_source: model.source.clone(),
            test_source: test_source.to_string(),
        }
    }
}

/// Standardizes with the model's own statistics, predicts every row and
/// tallies the confusion matrix. Refuses rows from the training session.
pub fn evaluate(model: &TrainedModel, test: &FeatureMatrix) -> Result<EvalReport, ModelError> {
    if !model.source.is_empty() && model.source == test.source {
        return Err(ModelError::SameSession(test.source.clone()));
    }
    let predicted = model.predict(test)?;
    Ok(EvalReport::from_predictions(model, &test.labels, &predicted, &test.source))
}
