//! Binary classifiers behind one interface: a multilayer perceptron, a
//! gradient-boosted tree ensemble, and a kernel support-vector classifier.
//!
//! Every model scores the probability-like chance that a row is an
//! imposter (label 1) in [0, 1]. Inputs are standardized with statistics
//! fitted on the training rows only; the fitted [`Standardizer`] travels with
//! the model.

pub mod gbt;
pub mod mlp;
pub mod standardize;
pub mod svc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub use gbt::GbtConfig;
pub use mlp::MlpConfig;
pub use standardize::Standardizer;
pub use svc::{Kernel, SvcConfig};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    Mlp,
    Gbt,
    Svc,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Mlp, Variant::Gbt, Variant::Svc];

    /// Name used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Mlp => "NN",
            Variant::Gbt => "XGB",
            Variant::Svc => "SVC",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nn" | "mlp" => Ok(Variant::Mlp),
            "xgb" | "gbt" | "xgboost" => Ok(Variant::Gbt),
            "svc" | "svm" => Ok(Variant::Svc),
            other => Err(Error::Config(format!("unknown model '{other}' (expected nn, xgb or svc)"))),
        }
    }
}

/// Hyperparameters for all three variants.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub mlp: MlpConfig,
    pub gbt: GbtConfig,
    pub svc: SvcConfig,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.mlp.validate()?;
        self.gbt.validate()?;
        self.svc.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Mlp(mlp::Mlp),
    Gbt(gbt::GbtModel),
    Svc(svc::SvcModel),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Training loss per epoch (MLP) or per boosting round (GBT).
    pub loss_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// A fitted model. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    format_version: u32,
    variant: Variant,
    standardizer: Standardizer,
    params: ModelParams,
    config: TrainConfig,
    seed: u64,
    log: TrainingLog,
}

impl TrainedModel {
    pub fn from_parts(
        standardizer: Standardizer,
        params: ModelParams,
        config: TrainConfig,
        seed: u64,
        log: TrainingLog,
    ) -> Self {
        let variant = match params {
            ModelParams::Mlp(_) => Variant::Mlp,
            ModelParams::Gbt(_) => Variant::Gbt,
            ModelParams::Svc(_) => Variant::Svc,
        };
        TrainedModel { format_version: MODEL_FORMAT_VERSION, variant, standardizer, params, config, seed, log }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn training_log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Imposter score in [0, 1] for a raw (unstandardized) vector.
    pub fn predict_score(&self, vector: &[f64]) -> Result<f64> {
        if vector.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: vector.len() });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("input vector has non-finite values".into()));
        }
        let z = self.standardizer.apply(vector);
        Ok(match &self.params {
            ModelParams::Mlp(m) => m.score(&z),
            ModelParams::Gbt(m) => m.score(&z),
            ModelParams::Svc(m) => m.score(&z),
        })
    }

    /// Label 1 (imposter) when the score reaches `threshold`.
    pub fn classify(&self, vector: &[f64], threshold: f64) -> Result<Label> {
        let score = self.predict_score(vector)?;
        classify_score(score, threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}

pub fn classify_score(score: f64, threshold: f64) -> Result<Label> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("threshold must be in (0, 1), got {threshold}")));
    }
    Ok(if score >= threshold { Label::Imposter } else { Label::Authentic })
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of logit `z` against a 0/1 target, computed without
/// overflow.
pub fn logistic_loss(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

fn validate_training(x: &[Vec<f64>], y: &[Label]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::InsufficientData("training set is empty".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Contract(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let dim = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::Dimension { expected: dim, got: r.len() });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Contract("training rows contain non-finite values".into()));
    }
    let positives = y.iter().filter(|&&l| l == Label::Imposter).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::InsufficientData("training data contains a single class".into()));
    }
    Ok(dim)
}

fn targets(y: &[Label]) -> Vec<f64> {
    y.iter().map(|l| f64::from(l.as_u8())).collect()
}

/// Trains one variant on raw feature rows.
pub fn train(
    variant: Variant,
    x: &[Vec<f64>],
    y: &[Label],
    config: &TrainConfig,
    seed: u64,
    exec: Execution,
) -> Result<TrainedModel> {
    config.validate()?;
    validate_training(x, y)?;
    let standardizer = Standardizer::fit(x)?;
    let xs: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
    let t = targets(y);
    let (params, log) = match variant {
        Variant::Mlp => {
            let (m, log) = mlp::train(&xs, &t, &config.mlp, seed)?;
            (ModelParams::Mlp(m), log)
        }
        Variant::Gbt => {
            let (m, log) = gbt::train(&xs, &t, &config.gbt, exec)?;
            (ModelParams::Gbt(m), log)
        }
        Variant::Svc => {
            let (m, log) = svc::train(&xs, &t, &config.svc, exec)?;
            (ModelParams::Svc(m), log)
        }
    };
    Ok(TrainedModel::from_parts(standardizer, params, config.clone(), seed, log))
}

pub fn train_mlp(ds: &LabeledDataset, config: &TrainConfig, seed: u64) -> Result<TrainedModel> {
    train(Variant::Mlp, &ds.features(), &ds.labels(), config, seed, Execution::Sequential)
}

pub fn train_gbt(ds: &LabeledDataset, config: &TrainConfig, seed: u64, exec: Execution) -> Result<TrainedModel> {
    train(Variant::Gbt, &ds.features(), &ds.labels(), config, seed, exec)
}

pub fn train_svc(ds: &LabeledDataset, config: &TrainConfig, seed: u64, exec: Execution) -> Result<TrainedModel> {
    train(Variant::Svc, &ds.features(), &ds.labels(), config, seed, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Two Gaussian blobs at ±3 with unit noise.
    pub(crate) fn blobs(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = crate::seed::rng(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { Label::Authentic } else { Label::Imposter };
            let c = if label == Label::Authentic { -3.0 } else { 3.0 };
            x.push((0..dim).map(|_| c + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect());
            y.push(label);
        }
        (x, y)
    }

    fn accuracy(m: &TrainedModel, x: &[Vec<f64>], y: &[Label]) -> f64 {
        let hits = x.iter().zip(y).filter(|(r, l)| m.classify(r, 0.5).unwrap() == **l).count();
        hits as f64 / y.len() as f64
    }

    #[test]
    fn separable_blobs_all_variants() {
        let (x, y) = blobs(200, 2, 1);
        let (xt, yt) = blobs(100, 2, 2);
        for v in Variant::ALL {
            let m = train(v, &x, &y, &TrainConfig::default(), 4, Execution::Parallel).unwrap();
            assert!(accuracy(&m, &xt, &yt) >= 0.98, "{v}");
            for r in &xt {
                let s = m.predict_score(r).unwrap();
                assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = vec![Label::Imposter, Label::Imposter];
        for v in Variant::ALL {
            assert!(matches!(
                train(v, &x, &y, &TrainConfig::default(), 0, Execution::Sequential),
                Err(Error::InsufficientData(_))
            ));
        }
    }

    #[test]
    fn classify_threshold_rules() {
        assert_eq!(classify_score(0.49, 0.5).unwrap(), Label::Authentic);
        assert_eq!(classify_score(0.5, 0.5).unwrap(), Label::Imposter);
        assert_eq!(classify_score(0.6, 0.9).unwrap(), Label::Authentic);
        assert!(classify_score(0.5, 1.0).is_err());
        assert!(classify_score(0.5, 0.0).is_err());
    }

    #[test]
    fn wrong_dimension_is_error() {
        let (x, y) = blobs(40, 3, 1);
        let m = train(Variant::Gbt, &x, &y, &TrainConfig::default(), 0, Execution::Sequential).unwrap();
        assert!(matches!(m.predict_score(&[1.0, 2.0]), Err(Error::Dimension { expected: 3, got: 2 })));
    }

    #[test]
    fn json_round_trip_preserves_scores() {
        let (x, y) = blobs(80, 4, 3);
        let mut rng = crate::seed::rng(5);
        let probes: Vec<Vec<f64>> = (0..20).map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        for v in Variant::ALL {
            let m = train(v, &x, &y, &TrainConfig::default(), 11, Execution::Sequential).unwrap();
            let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
            for p in &probes {
                assert!((m.predict_score(p).unwrap() - back.predict_score(p).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unknown_format_version() {
        let (x, y) = blobs(40, 2, 3);
        let m = train(Variant::Gbt, &x, &y, &TrainConfig::default(), 1, Execution::Sequential).unwrap();
        let json = m.to_json().unwrap().replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        assert!(matches!(TrainedModel::from_json(&json), Err(Error::Format(_))));
    }

    #[test]
    fn variant_names() {
        assert_eq!("NN".parse::<Variant>().unwrap(), Variant::Mlp);
        assert_eq!("xgboost".parse::<Variant>().unwrap(), Variant::Gbt);
        assert!("knn".parse::<Variant>().is_err());
    }

    #[test]
    fn threshold_monotonicity() {
        let (x, y) = blobs(100, 2, 8);
        let m = train(Variant::Mlp, &x, &y, &TrainConfig::default(), 2, Execution::Sequential).unwrap();
        let (xt, _) = blobs(200, 2, 9);
        let positives = |t: f64| -> Vec<usize> {
            (0..xt.len()).filter(|&i| m.classify(&xt[i], t).unwrap() == Label::Imposter).collect()
        };
        let mut prev = positives(0.05);
        for t in [0.2, 0.4, 0.5, 0.7, 0.95] {
            let cur = positives(t);
            assert!(cur.iter().all(|i| prev.contains(i)));
            prev = cur;
        }
    }
}
