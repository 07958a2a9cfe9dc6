//! Balanced authentic/imposter datasets for one target user.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::windowing::{feature_names, GestureVector};

/// Minimum gesture vectors a target user must contribute.
pub const MIN_ENROLLMENT: usize = 10;

/// Class label. Authentic rows are the enrolled user's; the numeric codes
/// are 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Authentic = 0,
    Imposter = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Result<Label> {
        match v {
            0 => Ok(Label::Authentic),
            1 => Ok(Label::Imposter),
            _ => Err(Error::Format(format!("invalid label {v}, expected 0 or 1"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    /// Index of the vector in the collection the pool was built from.
    pub source: usize,
    pub vector: GestureVector,
    pub label: Label,
}

/// Class-balanced rows before splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedPool {
    pub target_user: String,
    pub seed: u64,
    pub rows: Vec<LabeledRow>,
    /// Authentic vectors available before any downsampling.
    pub enrolled: usize,
    /// Imposter vectors available before sampling.
    pub imposter_pool: usize,
}

impl BalancedPool {
    pub fn count(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub target_user: String,
    pub partition: Partition,
    pub seed: u64,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn count(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.vector.values.clone()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Labels every target vector authentic and draws an equal number of
/// imposter vectors, without replacement, from all other users. When the
/// imposter pool is the smaller side the authentic vectors are downsampled
/// instead.
pub fn build_dataset(target: &str, vectors: &[GestureVector], seed: u64) -> Result<BalancedPool> {
    let (authentic, imposter): (Vec<usize>, Vec<usize>) =
        (0..vectors.len()).partition(|&i| vectors[i].user_id == target);
    if authentic.is_empty() {
        return Err(Error::InsufficientData(format!("target user '{target}' has no gesture vectors")));
    }
    if authentic.len() < MIN_ENROLLMENT {
        return Err(Error::InsufficientData(format!(
            "insufficient enrollment data: user '{target}' has {} gesture vectors, need {MIN_ENROLLMENT}",
            authentic.len()
        )));
    }
    if imposter.is_empty() {
        return Err(Error::InsufficientData("no other users to draw imposter data from".into()));
    }

    let mut rng = seed::rng(seed);
    let n = authentic.len().min(imposter.len());
    let pick = |mut idx: Vec<usize>, rng: &mut seed::Rng| -> Vec<usize> {
        if idx.len() > n {
            let (chosen, _) = idx.partial_shuffle(rng, n);
            chosen.to_vec()
        } else {
            idx.truncate(n);
            idx
        }
    };
    let enrolled = authentic.len();
    let imposter_pool = imposter.len();
    let authentic = pick(authentic, &mut rng);
    let imposter = pick(imposter, &mut rng);

    let row = |i: usize, label| LabeledRow { source: i, vector: vectors[i].clone(), label };
    let rows = authentic
        .into_iter()
        .map(|i| row(i, Label::Authentic))
        .chain(imposter.into_iter().map(|i| row(i, Label::Imposter)))
        .collect();
    Ok(BalancedPool { target_user: target.to_string(), seed, rows, enrolled, imposter_pool })
}

/// Stratified split: each class is shuffled and cut at
/// `round(train_fraction * class_size)`; each partition is then shuffled.
pub fn split(pool: &BalancedPool, train_fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction must be in (0, 1), got {train_fraction}")));
    }
    if pool.rows.len() < 5 {
        return Err(Error::InsufficientData(format!("pool of {} rows is too small to split", pool.rows.len())));
    }
    let mut rng = seed::rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [Label::Authentic, Label::Imposter] {
        let mut class: Vec<&LabeledRow> = pool.rows.iter().filter(|r| r.label == label).collect();
        class.shuffle(&mut rng);
        let cut = (train_fraction * class.len() as f64).round() as usize;
        if cut == 0 || cut >= class.len() {
            return Err(Error::InsufficientData(format!(
                "class {label} has {} rows; a {train_fraction} split leaves a partition empty",
                class.len()
            )));
        }
        train.extend(class[..cut].iter().map(|r| (*r).clone()));
        test.extend(class[cut..].iter().map(|r| (*r).clone()));
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    let ds = |partition, rows| LabeledDataset { target_user: pool.target_user.clone(), partition, seed, rows };
    Ok((ds(Partition::Train, train), ds(Partition::Test, test)))
}

/// Dataset CSV: the 44 feature columns followed by `label`.
pub fn dataset_csv(ds: &LabeledDataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = feature_names();
    header.push("label".into());
    w.write_record(&header)?;
    for r in &ds.rows {
        let mut rec: Vec<String> = r.vector.values.iter().map(f64::to_string).collect();
        rec.push(r.label.to_string());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads a dataset CSV back into feature rows and labels.
pub fn parse_dataset_csv(text: &str) -> Result<(Vec<Vec<f64>>, Vec<Label>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().next_back() != Some("label") || header.len() < 2 {
        return Err(Error::Format("dataset CSV must end with a 'label' column".into()));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let n = rec.len();
        let row = rec
            .iter()
            .take(n - 1)
            .map(|s| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        let label: u8 = rec[n - 1].parse().map_err(|_| Error::Format(format!("bad label '{}'", &rec[n - 1])))?;
        x.push(row);
        y.push(Label::from_u8(label)?);
    }
    Ok((x, y))
}
