//! A small rectifier network trained by mini-batch gradient descent, written
//! out longhand so training is deterministic and the gradients can be
//! checked against finite differences.

use rand::Rng;

use super::{PredictorError, TrainConfig};
use crate::hash::rng_from_words;

/// Hidden layer widths used when building a new model.
pub const HIDDEN_DIMS: [usize; 2] = [64, 64];

const TAG_MLP: u64 = 0x6d;

/// Fully-connected network `dims[0] -> ... -> dims.last()`, rectifier on
/// every layer but the last, linear scalar output. `weights[l]` is row-major
/// `dims[l+1] x dims[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

struct Forward {
    /// activations per layer, `a[0]` is the input
    a: Vec<Vec<f64>>,
    /// pre-activations per non-input layer
    z: Vec<Vec<f64>>,
}

#[derive(Clone)]
pub(super) struct Grads {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl MlpModel {
    /// He-uniform initialization seeded by `seed`.
    pub fn init(input_dim: usize, seed: u64) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(&HIDDEN_DIMS);
        dims.push(1);
        let mut rng = rng_from_words(&[seed, TAG_MLP]);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        MlpModel { dims, weights, biases }
    }

    pub fn predict(&self, input: &[f64]) -> f64 {
        self.forward(input).a.last().unwrap()[0]
    }

    fn forward(&self, input: &[f64]) -> Forward {
        debug_assert_eq!(input.len(), self.dims[0]);
        let layers = self.dims.len() - 1;
        let mut a = Vec::with_capacity(layers + 1);
        let mut z = Vec::with_capacity(layers);
        a.push(input.to_vec());
        for l in 0..layers {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let mut zl = self.biases[l].clone();
            let prev = &a[l];
            for o in 0..fan_out {
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                let mut acc = 0.0;
                for (w, x) in row.iter().zip(prev) {
                    acc += w * x;
                }
                zl[o] += acc;
            }
            let al = if l != layers - 1 {
                zl.iter().map(|&v| v.max(0.0)).collect()
            } else {
                zl.clone()
            };
            z.push(zl);
            a.push(al);
        }
        Forward { a, z }
    }

    /// Squared-error loss `(predict(x) - y)^2` for one sample.
    pub fn sample_loss(&self, input: &[f64], target: f64) -> f64 {
        let e = self.predict(input) - target;
        e * e
    }

    /// Analytic gradient of [`Self::sample_loss`] with respect to every
    /// weight and bias.
    pub(super) fn backprop(&self, input: &[f64], target: f64) -> (f64, Grads) {
        let fwd = self.forward(input);
        let layers = self.dims.len() - 1;
        let pred = fwd.a[layers][0];
        let loss = (pred - target) * (pred - target);

        let mut gw: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut gb: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();

        // delta of the linear output layer
        let mut delta = vec![2.0 * (pred - target)];
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let prev = &fwd.a[l];
            for o in 0..fan_out {
                gb[l][o] = delta[o];
                let row = &mut gw[l][o * fan_in..(o + 1) * fan_in];
                for (g, x) in row.iter_mut().zip(prev) {
                    *g = delta[o] * x;
                }
            }
            if l == 0 {
                break;
            }
            let mut next = vec![0.0; fan_in];
            for (i, nd) in next.iter_mut().enumerate() {
                let mut acc = 0.0;
                for o in 0..fan_out {
                    acc += delta[o] * self.weights[l][o * fan_in + i];
                }
                // rectifier gate from the previous layer's pre-activation
                *nd = if fwd.z[l - 1][i] > 0.0 { acc } else { 0.0 };
            }
            delta = next;
        }
        (loss, Grads { w: gw, b: gb })
    }

    /// Deterministic mini-batch gradient descent on mean squared error with
    /// l2 weight decay; returns the trained model and its final full-pass
    /// training MSE.
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &TrainConfig) -> (MlpModel, f64) {
        let mut model = MlpModel::init(x[0].len(), cfg.seed);
        let mut rng = rng_from_words(&[cfg.seed, TAG_MLP, 1]);
        let n = x.len();
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..cfg.epochs {
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            for batch in order.chunks(cfg.batch_size) {
                let scale = 1.0 / batch.len() as f64;
                let mut acc_w: Vec<Vec<f64>> =
                    model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
                let mut acc_b: Vec<Vec<f64>> =
                    model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
                for &idx in batch {
                    let (_, g) = model.backprop(&x[idx], y[idx]);
                    for (a, gl) in acc_w.iter_mut().zip(&g.w) {
                        for (av, gv) in a.iter_mut().zip(gl) {
                            *av += gv * scale;
                        }
                    }
                    for (a, gl) in acc_b.iter_mut().zip(&g.b) {
                        for (av, gv) in a.iter_mut().zip(gl) {
                            *av += gv * scale;
                        }
                    }
                }
                for (w, g) in model.weights.iter_mut().zip(&acc_w) {
                    for (wv, gv) in w.iter_mut().zip(g) {
                        *wv -= cfg.learning_rate * (gv + cfg.l2 * *wv);
                    }
                }
                for (b, g) in model.biases.iter_mut().zip(&acc_b) {
                    for (bv, gv) in b.iter_mut().zip(g) {
                        *bv -= cfg.learning_rate * gv;
                    }
                }
            }
        }
        let mse = x
            .iter()
            .zip(y)
            .map(|(xi, &yi)| model.sample_loss(xi, yi))
            .sum::<f64>()
            / n as f64;
        (model, mse)
    }

    /// Max over parameters of the relative error between the analytic
    /// gradient and a central finite difference with step `eps`, where
    /// `rel(a, n) = |a - n| / max(1, |a| + |n|)`.
    pub fn grad_check(&self, input: &[f64], target: f64, eps: f64) -> Result<f64, PredictorError> {
        if eps <= 0.0 || eps.is_nan() {
            return Err(PredictorError::InvalidConfig("eps must be positive".into()));
        }
        let (_, analytic) = self.backprop(input, target);
        let mut worst = 0.0f64;
        let mut probe = self.clone();
        for l in 0..self.weights.len() {
            for i in 0..self.weights[l].len() {
                let orig = self.weights[l][i];
                probe.weights[l][i] = orig + eps;
                let up = probe.sample_loss(input, target);
                probe.weights[l][i] = orig - eps;
                let down = probe.sample_loss(input, target);
                probe.weights[l][i] = orig;
                let numeric = (up - down) / (2.0 * eps);
                worst = worst.max(rel_err(analytic.w[l][i], numeric));
            }
            for i in 0..self.biases[l].len() {
                let orig = self.biases[l][i];
                probe.biases[l][i] = orig + eps;
                let up = probe.sample_loss(input, target);
                probe.biases[l][i] = orig - eps;
                let down = probe.sample_loss(input, target);
                probe.biases[l][i] = orig;
                let numeric = (up - down) / (2.0 * eps);
                worst = worst.max(rel_err(analytic.b[l][i], numeric));
            }
        }
        Ok(worst)
    }
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / 1.0f64.max(a.abs() + n.abs())
}
