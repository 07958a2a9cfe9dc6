//! Gradient-boosted regression trees on the logistic loss.
//!
//! Each round fits a tree to the per-row gradient `p - y` and curvature
//! `p (1 - p)` of the loss. Splits are chosen by exact greedy search over
//! every threshold between distinct sorted feature values, scored with the
//! second-order gain
//!
//! ```text
//! gain = ½ [ G_L² / (H_L + λ) + G_R² / (H_R + λ) - G² / (H + λ) ]
//! ```
//!
//! and leaves take the Newton weight `-G / (H + λ)`. The final score is
//! `sigmoid(base + learning_rate * Σ tree(x))` with `base` the log-odds of
//! the training positive rate.

use serde::{Deserialize, Serialize};

use super::{logistic_loss, sigmoid, TrainingLog};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig { trees: 100, max_depth: 3, learning_rate: 0.1, min_samples_leaf: 5, lambda: 1.0 }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::Config("gbt tree count, depth and leaf size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!("gbt learning rate must be in (0, 1], got {}", self.learning_rate)));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::Config("gbt lambda must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    /// The root split, if the tree has one.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl GbtModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn score_term(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Best split of `rows` on one feature; ties keep the lowest threshold.
fn best_split_on(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    feature: usize,
    cfg: &GbtConfig,
) -> Option<SplitCandidate> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let g_total: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| hess[r]).sum();
    let parent = score_term(g_total, h_total, cfg.lambda);
    let n = sorted.len();
    let (mut gl, mut hl) = (0.0, 0.0);
    let mut best: Option<SplitCandidate> = None;
    for k in 0..n.saturating_sub(1) {
        let r = sorted[k];
        gl += grad[r];
        hl += hess[r];
        let left_n = k + 1;
        if left_n < cfg.min_samples_leaf || n - left_n < cfg.min_samples_leaf {
            continue;
        }
        let lo = x[r][feature];
        let hi = x[sorted[k + 1]][feature];
        if lo >= hi {
            continue;
        }
        let gain = 0.5 * (score_term(gl, hl, cfg.lambda) + score_term(g_total - gl, h_total - hl, cfg.lambda) - parent);
        if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid > lo { mid } else { hi };
            best = Some(SplitCandidate { feature, threshold, gain });
        }
    }
    best
}

/// Exact greedy search over all features. Per-feature searches may run in
/// parallel; the reduction is in feature order, so ties resolve to the
/// lowest feature index either way.
pub fn best_split(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    cfg: &GbtConfig,
    exec: Execution,
) -> Option<SplitCandidate> {
    let dim = x.first()?.len();
    let per_feature = exec.map_range(dim, |f| best_split_on(x, grad, hess, rows, f, cfg));
    per_feature.into_iter().flatten().fold(None, |acc: Option<SplitCandidate>, c| match acc {
        Some(b) if b.gain >= c.gain => Some(b),
        _ => Some(c),
    })
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    cfg: &'a GbtConfig,
    exec: Execution,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let g: f64 = rows.iter().map(|&r| self.grad[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r]).sum();
        self.nodes.push(Node::Leaf { value: leaf_weight(g, h, self.cfg.lambda) });
        if depth >= self.cfg.max_depth || rows.len() < 2 * self.cfg.min_samples_leaf {
            return id;
        }
        let Some(split) = best_split(self.x, self.grad, self.hess, rows, self.cfg, self.exec) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][split.feature] < split.threshold);
        let left = self.build(&l, depth + 1);
        let right = self.build(&r, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

pub fn fit_tree(x: &[Vec<f64>], grad: &[f64], hess: &[f64], cfg: &GbtConfig, exec: Execution) -> RegressionTree {
    let rows: Vec<usize> = (0..x.len()).collect();
    let mut b = TreeBuilder { x, grad, hess, cfg, exec, nodes: Vec::new() };
    b.build(&rows, 0);
    RegressionTree { nodes: b.nodes }
}

/// Log-odds of the positive rate.
pub fn base_score(y: &[f64]) -> f64 {
    let p = y.iter().sum::<f64>() / y.len() as f64;
    (p / (1.0 - p)).ln()
}

fn mean_loss(margins: &[f64], y: &[f64]) -> f64 {
    margins.iter().zip(y).map(|(&z, &t)| logistic_loss(z, t)).sum::<f64>() / y.len() as f64
}

/// Boosts `cfg.trees` rounds on standardized rows with 0/1 targets. The
/// training log holds the mean loss before the first round and after each.
pub fn train(x: &[Vec<f64>], y: &[f64], cfg: &GbtConfig, exec: Execution) -> Result<(GbtModel, TrainingLog)> {
    let base = base_score(y);
    if !base.is_finite() {
        return Err(Error::InsufficientData("training data contains a single class".into()));
    }
    let mut margins = vec![base; x.len()];
    let mut history = vec![mean_loss(&margins, y)];
    let mut trees = Vec::with_capacity(cfg.trees);
    let mut grad = vec![0.0; x.len()];
    let mut hess = vec![0.0; x.len()];
    for _ in 0..cfg.trees {
        for i in 0..x.len() {
            let p = sigmoid(margins[i]);
            grad[i] = p - y[i];
            hess[i] = p * (1.0 - p);
        }
        let tree = fit_tree(x, &grad, &hess, cfg, exec);
        for (m, row) in margins.iter_mut().zip(x) {
            *m += cfg.learning_rate * tree.predict(row);
        }
        history.push(mean_loss(&margins, y));
        trees.push(tree);
    }
    let model = GbtModel { base_score: base, learning_rate: cfg.learning_rate, trees };
    Ok((model, TrainingLog { loss_history: history, converged: true, iterations: cfg.trees }))
}
