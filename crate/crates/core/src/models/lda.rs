use super::{argmax, ModelError, Prepared};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaParams {
    /// Ridge added to the pooled covariance diagonal, as a fraction of its
    /// mean diagonal entry.
    pub ridge_scale: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams { ridge_scale: 1e-6 }
    }
}

/// Shared-covariance Gaussian discriminant: one linear score per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub params: LdaParams,
    /// `K x d` discriminant weights, `Sigma^-1 mu_k` per class.
    pub weights: Vec<Vec<f64>>,
    /// `-mu_k' Sigma^-1 mu_k / 2 + ln(prior_k)`.
    pub intercepts: Vec<f64>,
    pub priors: Vec<f64>,
}

impl LdaModel {
    pub(crate) fn fit(data: &Prepared, params: &LdaParams) -> Result<Self, ModelError> {
        let (n, d, k) = (data.n(), data.d, data.k());

        let mut counts = vec![0usize; k];
        let mut means = vec![vec![0.0; d]; k];
        for i in 0..n {
            let c = data.y[i];
            counts[c] += 1;
            for (m, v) in means[c].iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }

        let mut cov = DMatrix::<f64>::zeros(d, d);
        let mut centered = DVector::<f64>::zeros(d);
        for i in 0..n {
            let mu = &means[data.y[i]];
            for (j, (v, m)) in data.row(i).iter().zip(mu).enumerate() {
                centered[j] = v - m;
            }
            cov.ger(1.0, &centered, &centered, 1.0);
        }
        cov /= (n - k) as f64;

        let ridge = params.ridge_scale * cov.trace() / d as f64;
        for j in 0..d {
            cov[(j, j)] += ridge;
        }
        let chol = cov.cholesky().ok_or(ModelError::SingularCovariance)?;

        let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let mut weights = Vec::with_capacity(k);
        let mut intercepts = Vec::with_capacity(k);
        for (mu, prior) in means.iter().zip(&priors) {
            let mu_v = DVector::from_column_slice(mu);
            let w = chol.solve(&mu_v);
            if w.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::SingularCovariance);
            }
            intercepts.push(-0.5 * w.dot(&mu_v) + prior.ln());
            weights.push(w.iter().copied().collect());
        }
        Ok(LdaModel { params: params.clone(), weights, intercepts, priors })
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(self.scores(row))
    }
}
