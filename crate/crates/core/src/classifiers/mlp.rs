//! Feed-forward network: rectifier hidden layers, one logistic output,
//! binary cross-entropy loss, mini-batch Adam.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{logistic_loss, sigmoid, TrainingLog};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![64, 32],
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.contains(&0) || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("mlp layer sizes, epochs and batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!("mlp learning rate must be in (0, 1], got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return Err(Error::Config("mlp moment decay rates must be in [0, 1) and epsilon positive".into()));
        }
        Ok(())
    }
}

/// Fully connected layer; `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.biases[o];
            out.push(z);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    /// Layer sizes `input -> hidden... -> 1`, all parameters zero.
    pub fn zeros(input: usize, hidden: &[usize]) -> Self {
        let mut sizes = vec![input];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| Dense { inputs: w[0], outputs: w[1], weights: vec![0.0; w[0] * w[1]], biases: vec![0.0; w[1]] })
            .collect();
        Mlp { layers }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random(input: usize, hidden: &[usize], rng: &mut impl Rng) -> Self {
        let mut m = Mlp::zeros(input, hidden);
        for layer in &mut m.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        m
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter vector length");
        let mut k = 0;
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = p[k];
                k += 1;
            }
        }
    }

    /// Post-activation outputs of every layer; the last entry holds the logit.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.forward(acts.last().unwrap(), &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.activations(x).last().unwrap()[0]
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Mean cross-entropy over `rows`.
    pub fn loss(&self, x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> f64 {
        rows.iter().map(|&i| logistic_loss(self.logit(&x[i]), y[i])).sum::<f64>() / rows.len() as f64
    }

    /// Mean cross-entropy over `rows` and its gradient, flattened in
    /// [`Mlp::params`] order.
    pub fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> =
            self.layers.iter().map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()])).collect();
        let inv = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let acts = self.activations(&x[i]);
            let z = acts.last().unwrap()[0];
            loss += logistic_loss(z, y[i]);
            let mut delta = vec![(sigmoid(z) - y[i]) * inv];
            for (l, layer) in self.layers.iter().enumerate().rev() {
                let input = &acts[l];
                let (gw, gb) = &mut grads[l];
                for (o, d) in delta.iter().enumerate() {
                    gb[o] += d;
                    let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, v) in row.iter_mut().zip(input) {
                        *g += d * v;
                    }
                }
                if l > 0 {
                    delta = (0..layer.inputs)
                        .map(|k| {
                            if input[k] <= 0.0 {
                                return 0.0;
                            }
                            (0..layer.outputs).map(|o| layer.weights[o * layer.inputs + k] * delta[o]).sum()
                        })
                        .collect();
                }
            }
        }
        let flat = grads.into_iter().flat_map(|(w, b)| w.into_iter().chain(b)).collect();
        (loss * inv, flat)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &MlpConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = cfg.beta1 * self.m[k] + (1.0 - cfg.beta1) * grad[k];
            self.v[k] = cfg.beta2 * self.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
            let mh = self.m[k] / c1;
            let vh = self.v[k] / c2;
            params[k] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon);
        }
    }
}

fn check_finite(loss: f64, grad: &[f64], epoch: usize) -> Result<()> {
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Divergence(format!("non-finite loss in epoch {epoch}")));
    }
    Ok(())
}

/// Trains on standardized rows with 0/1 targets. Deterministic in `seed`.
pub fn train(x: &[Vec<f64>], y: &[f64], cfg: &MlpConfig, seed: u64) -> Result<(Mlp, TrainingLog)> {
    let mut rng = seed::rng(seed);
    let mut net = Mlp::random(x[0].len(), &cfg.hidden, &mut rng);
    let mut params = net.params();
    let mut adam = Adam { m: vec![0.0; params.len()], v: vec![0.0; params.len()], t: 0 };
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grad) = net.loss_and_gradient(x, y, batch);
            check_finite(loss, &grad, epoch)?;
            total += loss * batch.len() as f64;
            adam.step(&mut params, &grad, cfg);
            net.set_params(&params);
        }
        history.push(total / x.len() as f64);
    }
    let log = TrainingLog { loss_history: history, converged: true, iterations: cfg.epochs };
    Ok((net, log))
}
