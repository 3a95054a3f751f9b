use super::{argmax, ModelError, Prepared};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 64,
            epochs: 200,
            learning_rate: 1e-3,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One-hidden-layer ReLU network with a softmax output.
///
/// Parameters are stored flat as `[W1 (h x d), b1 (h), W2 (k x h), b2 (k)]`,
/// row-major, which keeps the optimizer and the gradient check simple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub params: MlpParams,
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    /// Mean training loss per epoch.
    pub loss_history: Vec<f64>,
}

struct Layout {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    len: usize,
}

impl Mlp {
    fn layout(&self) -> Layout {
        let (d, h, k) = (self.inputs, self.hidden, self.outputs);
        let w1 = 0;
        let b1 = w1 + h * d;
        let w2 = b1 + h;
        let b2 = w2 + k * h;
        Layout { w1, b1, w2, b2, len: b2 + k }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(inputs: usize, hidden: usize, outputs: usize, params: &MlpParams, rng: &mut impl Rng) -> Self {
        let mut m =
            Mlp { params: params.clone(), inputs, hidden, outputs, weights: Vec::new(), loss_history: Vec::new() };
        let l = m.layout();
        m.weights = vec![0.0; l.len];
        let limit1 = (6.0 / (inputs + hidden) as f64).sqrt();
        for w in &mut m.weights[l.w1..l.b1] {
            *w = rng.gen_range(-limit1..limit1);
        }
        let limit2 = (6.0 / (hidden + outputs) as f64).sqrt();
        for w in &mut m.weights[l.w2..l.b2] {
            *w = rng.gen_range(-limit2..limit2);
        }
        m
    }

    fn hidden_activations(&self, x: &[f64], pre: &mut [f64]) {
        let l = self.layout();
        let d = self.inputs;
        for (j, z) in pre.iter_mut().enumerate() {
            let w = &self.weights[l.w1 + j * d..l.w1 + (j + 1) * d];
            *z = self.weights[l.b1 + j] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    fn logits(&self, hidden: &[f64], out: &mut [f64]) {
        let l = self.layout();
        let h = self.hidden;
        for (c, z) in out.iter_mut().enumerate() {
            let w = &self.weights[l.w2 + c * h..l.w2 + (c + 1) * h];
            *z = self.weights[l.b2 + c] + w.iter().zip(hidden).map(|(a, b)| a * b.max(0.0)).sum::<f64>();
        }
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut pre = vec![0.0; self.hidden];
        let mut z = vec![0.0; self.outputs];
        self.hidden_activations(x, &mut pre);
        self.logits(&pre, &mut z);
        softmax(&mut z);
        z
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut pre = vec![0.0; self.hidden];
        let mut z = vec![0.0; self.outputs];
        self.hidden_activations(x, &mut pre);
        self.logits(&pre, &mut z);
        argmax(z)
    }

    /// Mean cross-entropy over the rows and its gradient with respect to
    /// every entry of `weights`.
    pub fn loss_and_gradient(&self, rows: &[&[f64]], targets: &[usize]) -> (f64, Vec<f64>) {
        let l = self.layout();
        let (d, h, k) = (self.inputs, self.hidden, self.outputs);
        let mut grad = vec![0.0; l.len];
        let mut loss = 0.0;
        let b = rows.len() as f64;
        let mut pre = vec![0.0; h];
        let mut z = vec![0.0; k];
        let mut dhidden = vec![0.0; h];
        for (x, &t) in rows.iter().zip(targets) {
            self.hidden_activations(x, &mut pre);
            self.logits(&pre, &mut z);
            let log_norm = log_sum_exp(&z);
            loss -= z[t] - log_norm;

            dhidden.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..k {
                let p = (z[c] - log_norm).exp();
                let dz = (p - if c == t { 1.0 } else { 0.0 }) / b;
                grad[l.b2 + c] += dz;
                let w2 = &self.weights[l.w2 + c * h..l.w2 + (c + 1) * h];
                let g2 = &mut grad[l.w2 + c * h..l.w2 + (c + 1) * h];
                for j in 0..h {
                    g2[j] += dz * pre[j].max(0.0);
                    dhidden[j] += dz * w2[j];
                }
            }
            for j in 0..h {
                if pre[j] > 0.0 {
                    let dz = dhidden[j];
                    grad[l.b1 + j] += dz;
                    let g1 = &mut grad[l.w1 + j * d..l.w1 + (j + 1) * d];
                    for (g, xi) in g1.iter_mut().zip(x.iter()) {
                        *g += dz * xi;
                    }
                }
            }
        }
        (loss / b, grad)
    }

    pub(crate) fn fit(data: &Prepared, params: &MlpParams, seed: u64) -> Result<Self, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = Mlp::init(data.d, params.hidden.max(1), data.k(), params, &mut rng);
        let n_params = model.weights.len();
        let (mut m, mut v) = (vec![0.0; n_params], vec![0.0; n_params]);
        let mut step = 0i32;
        let mut order: Vec<usize> = (0..data.n()).collect();
        let batch = params.batch_size.max(1);

        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for (bi, chunk) in order.chunks(batch).enumerate() {
                let rows: Vec<&[f64]> = chunk.iter().map(|&i| data.row(i)).collect();
                let targets: Vec<usize> = chunk.iter().map(|&i| data.y[i]).collect();
                let (loss, grad) = model.loss_and_gradient(&rows, &targets);
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(ModelError::NonFiniteLoss { epoch, batch: bi });
                }
                epoch_loss += loss * chunk.len() as f64;

                step += 1;
                let c1 = 1.0 - params.beta1.powi(step);
                let c2 = 1.0 - params.beta2.powi(step);
                for (((w, g), m), v) in model.weights.iter_mut().zip(&grad).zip(&mut m).zip(&mut v) {
                    *m = params.beta1 * *m + (1.0 - params.beta1) * g;
                    *v = params.beta2 * *v + (1.0 - params.beta2) * g * g;
                    *w -= params.learning_rate * (*m / c1) / ((*v / c2).sqrt() + params.epsilon);
                }
            }
            model.loss_history.push(epoch_loss / data.n() as f64);
        }
        Ok(model)
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn softmax(z: &mut [f64]) {
    let lse = log_sum_exp(z);
    z.iter_mut().for_each(|v| *v = (*v - lse).exp());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Mlp::init(4, 8, 3, &MlpParams::default(), &mut rng);
        let p = m.probabilities(&[0.1, -0.4, 2.0, 0.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(m.weights.len(), 4 * 8 + 8 + 3 * 8 + 3);
        // Biases start at zero.
        assert!(m.weights[32..40].iter().all(|&b| b == 0.0));
    }
}
