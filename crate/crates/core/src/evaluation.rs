//! Confusion matrices, the four reported metrics, and grouped reports.
//!
//! The positive class is the authentic user being accepted: a false positive
//! is an imposter accepted, a false negative an authentic user rejected.
//! Labels use 0 for authentic and 1 for imposter, so "positive" here means
//! label 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Authentic accepted.
    pub true_pos: usize,
    /// Imposter accepted.
    pub false_pos: usize,
    /// Imposter rejected.
    pub true_neg: usize,
    /// Authentic rejected.
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Tallies predicted against true labels (0 authentic, 1 imposter).
pub fn confusion(predictions: &[u8], truth: &[u8]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::Contract(format!("{} predictions for {} labels", predictions.len(), truth.len())));
    }
    if truth.is_empty() {
        return Err(Error::InsufficientData("no rows to evaluate".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truth) {
        match (t, p) {
            (0, 0) => cm.true_pos += 1,
            (1, 0) => cm.false_pos += 1,
            (0, 1) => cm.false_neg += 1,
            (1, 1) => cm.true_neg += 1,
            _ => return Err(Error::Format(format!("invalid label pair (truth {t}, prediction {p})"))),
        }
    }
    Ok(cm)
}

/// Classifies every row of `ds` and tallies the outcome.
pub fn evaluate_model(model: &TrainedModel, ds: &LabeledDataset, threshold: f64) -> Result<ConfusionMatrix> {
    let predictions = ds
        .rows
        .iter()
        .map(|r| model.classify(&r.vector.values, threshold).map(|l| l.as_u8()))
        .collect::<Result<Vec<u8>>>()?;
    let truth: Vec<u8> = ds.rows.iter().map(|r| r.label.as_u8()).collect();
    confusion(&predictions, &truth)
}

/// Which ratios had a zero denominator (and were reported as 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Degeneracy {
    pub precision: bool,
    pub recall: bool,
    pub fpr: bool,
    pub fnr: bool,
    pub f1: bool,
}

impl Degeneracy {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.fpr || self.fnr || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fnr: f64,
    pub fpr: f64,
    pub degenerate: Degeneracy,
}

fn ratio(num: usize, den: usize, flag: &mut bool) -> f64 {
    if den == 0 {
        *flag = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InsufficientData("empty confusion matrix".into()));
    }
    let mut d = Degeneracy::default();
    let accuracy = (cm.true_pos + cm.true_neg) as f64 / total as f64;
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos, &mut d.precision);
    let recall = ratio(cm.true_pos, cm.true_pos + cm.false_neg, &mut d.recall);
    let fpr = ratio(cm.false_pos, cm.false_pos + cm.true_neg, &mut d.fpr);
    let fnr = ratio(cm.false_neg, cm.false_neg + cm.true_pos, &mut d.fnr);
    // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn) whenever tp > 0; one division keeps it correctly rounded
    let f1 = if cm.true_pos > 0 {
        (2 * cm.true_pos) as f64 / (2 * cm.true_pos + cm.false_pos + cm.false_neg) as f64
    } else {
        d.f1 = true;
        0.0
    };
    Ok(Metrics { accuracy, precision, recall, f1, fnr, fpr, degenerate: d })
}

/// One evaluated (user, game, model) combination, metrics in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub user: String,
    pub game: String,
    pub model: String,
    pub accuracy: f64,
    pub f1: f64,
    pub fnr: f64,
    pub fpr: f64,
}

impl ReportRow {
    pub fn from_metrics(user: &str, game: &str, model: &str, m: &Metrics) -> Self {
        ReportRow {
            user: user.to_string(),
            game: game.to_string(),
            model: model.to_string(),
            accuracy: 100.0 * m.accuracy,
            f1: 100.0 * m.f1,
            fnr: 100.0 * m.fnr,
            fpr: 100.0 * m.fpr,
        }
    }

    fn values(&self) -> [f64; 4] {
        [self.accuracy, self.f1, self.fnr, self.fpr]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Model,
    Game,
    #[default]
    ModelGame,
}

impl std::str::FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(GroupBy::Model),
            "game" => Ok(GroupBy::Game),
            "model-game" | "model_game" | "model×game" => Ok(GroupBy::ModelGame),
            _ => Err(Error::Config(format!("unknown grouping '{s}' (expected model, game or model-game)"))),
        }
    }
}

/// Label used in a key column that the grouping does not split on.
pub const ALL_KEY: &str = "All";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub game: String,
    pub model: String,
    pub count: usize,
    /// Accuracy, F1, FNR, FPR.
    pub mean: [f64; 4],
    /// Population standard deviations, same order as `mean`.
    pub std: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub groups: Vec<GroupSummary>,
}

/// Mean and population standard deviation of each metric per group, groups
/// ordered by (game, model) ascending.
pub fn aggregate_report(rows: &[ReportRow], group_by: GroupBy) -> Report {
    let mut groups: BTreeMap<(String, String), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        let key = match group_by {
            GroupBy::Model => (ALL_KEY.to_string(), r.model.clone()),
            GroupBy::Game => (r.game.clone(), ALL_KEY.to_string()),
            GroupBy::ModelGame => (r.game.clone(), r.model.clone()),
        };
        groups.entry(key).or_default().push(r);
    }
    let groups = groups
        .into_iter()
        .map(|((game, model), members)| {
            let n = members.len() as f64;
            let mut mean = [0.0; 4];
            for m in &members {
                for (acc, v) in mean.iter_mut().zip(m.values()) {
                    *acc += v;
                }
            }
            mean.iter_mut().for_each(|v| *v /= n);
            let mut std = [0.0; 4];
            for m in &members {
                for ((acc, v), mu) in std.iter_mut().zip(m.values()).zip(&mean) {
                    *acc += (v - mu) * (v - mu);
                }
            }
            std.iter_mut().for_each(|v| *v = (*v / n).sqrt());
            GroupSummary { game, model, count: members.len(), mean, std }
        })
        .collect();
    Report { rows: rows.to_vec(), groups }
}

pub const REPORT_HEADER: [&str; 7] = ["User", "Game", "Model", "Accuracy", "F1 Score", "FNR", "FPR"];

fn pct(v: f64) -> String {
    format!("{v:.4}")
}

/// Renders the report: per-user rows, then one `Avg` row per group, then
/// one `Std` row per group.
pub fn report_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        let mut rec = vec![r.user.clone(), r.game.clone(), r.model.clone()];
        rec.extend(r.values().into_iter().map(pct));
        w.write_record(&rec)?;
    }
    for (tag, pick) in [("Avg", true), ("Std", false)] {
        for g in &report.groups {
            let mut rec = vec![tag.to_string(), g.game.clone(), g.model.clone()];
            let vals = if pick { g.mean } else { g.std };
            rec.extend(vals.into_iter().map(pct));
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads the per-user rows of a report CSV, skipping `Avg`/`Std` rows.
pub fn parse_report_rows(text: &str) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    if r.headers()?.iter().ne(REPORT_HEADER) {
        return Err(Error::Format(format!("report header must be {}", REPORT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 7 {
            return Err(Error::Format(format!("report row has {} columns", rec.len())));
        }
        if rec[0] == *"Avg" || rec[0] == *"Std" {
            continue;
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| Error::Format(format!("bad number '{}'", &rec[i])));
        out.push(ReportRow {
            user: rec[0].to_string(),
            game: rec[1].to_string(),
            model: rec[2].to_string(),
            accuracy: num(3)?,
            f1: num(4)?,
            fnr: num(5)?,
            fpr: num(6)?,
        });
    }
    Ok(out)
}
