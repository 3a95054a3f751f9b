use super::{FeatureError, FeatureMatrix};
use serde::{Deserialize, Serialize};

/// Per-column z-scoring fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Columns whose spread was zero; their scale was replaced by 1.
    pub degenerate: Vec<usize>,
}

impl Standardizer {
    pub fn fit(train: &FeatureMatrix) -> Result<Self, FeatureError> {
        let n = train.rows();
        if n < 2 {
            return Err(FeatureError::TooFewRows(n));
        }
        let w = train.width();
        let mut mean = vec![0.0; w];
        for row in train.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; w];
        for row in train.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut degenerate = Vec::new();
        let scale = var
            .iter()
            .zip(&mean)
            .enumerate()
            .map(|(c, (s, m))| {
                let std = (s / n as f64).sqrt();
                if std.is_finite() && std > 1e-12 * m.abs() && std > 0.0 {
                    std
                } else {
                    degenerate.push(c);
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale, degenerate })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
    }

    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if m.width() != self.width() {
            return Err(FeatureError::WidthMismatch { expected: self.width(), got: m.width() });
        }
        let mut out = m.clone();
        let w = self.width();
        for row in out.data_mut().chunks_exact_mut(w) {
            self.transform_row(row);
        }
        Ok(out)
    }
}
