//! Fixed-size gesture windows and their 44-value summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::{Game, UserLog};
use crate::kinematics::{compute_kinematics, Feature, KinematicSample, FEATURE_COUNT};
use crate::seed::shuffle_rows;

pub const DEFAULT_WINDOW: usize = 10;
pub const STAT_COUNT: usize = 4;
pub const VECTOR_LEN: usize = FEATURE_COUNT * STAT_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stat {
    Avg,
    Min,
    Max,
    Std,
}

impl Stat {
    pub const ALL: [Stat; STAT_COUNT] = [Stat::Avg, Stat::Min, Stat::Max, Stat::Std];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Avg => "avg",
            Stat::Min => "min",
            Stat::Max => "max",
            Stat::Std => "std",
        }
    }
}

/// Position of (`feature`, `stat`) in a gesture vector: feature-major, with
/// the four statistics of each feature adjacent.
pub fn vector_index(feature: usize, stat: Stat) -> usize {
    feature * STAT_COUNT + stat as usize
}

/// Column names `<feature>_<stat>` in vector order.
pub fn feature_names() -> Vec<String> {
    Feature::ALL.iter().flat_map(|f| Stat::ALL.iter().map(move |s| format!("{}_{}", f.name(), s.name()))).collect()
}

/// How the two fingers' samples are merged before windowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "seed")]
pub enum SampleOrder {
    /// Interleave both fingers by timestamp.
    #[default]
    Timestamp,
    /// Seeded row shuffle of the combined samples.
    Shuffled(u64),
}

/// Merges per-finger sample sequences into the one sequence that is cut into
/// windows. Timestamp ties keep finger 0 first.
pub fn combine_fingers(per_finger: Vec<Vec<KinematicSample>>, order: SampleOrder) -> Vec<KinematicSample> {
    let mut all: Vec<KinematicSample> = per_finger.into_iter().flatten().collect();
    match order {
        SampleOrder::Timestamp => {
            all.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.finger.cmp(&b.finger)));
            all
        }
        SampleOrder::Shuffled(seed) => shuffle_rows(all, seed),
    }
}

/// Non-overlapping consecutive windows of `window` samples; the trailing
/// partial window is discarded.
pub fn window_gestures(samples: &[KinematicSample], window: usize) -> Result<Vec<&[KinematicSample]>> {
    if window < 2 {
        return Err(Error::Config(format!("window must be at least 2, got {window}")));
    }
    if samples.len() < window {
        log::warn!("{} samples is less than one window of {window}", samples.len());
    }
    Ok(samples.chunks_exact(window).collect())
}

/// Mean, min, max and population standard deviation of each feature.
pub fn aggregate(window: &[KinematicSample]) -> Result<[f64; VECTOR_LEN]> {
    if window.is_empty() {
        return Err(Error::Contract("cannot aggregate an empty window".into()));
    }
    if let Some(bad) = window.iter().find(|s| !s.is_finite()) {
        return Err(Error::Contract(format!("non-finite kinematic sample at t={}", bad.timestamp)));
    }
    let rows: Vec<[f64; FEATURE_COUNT]> = window.iter().map(KinematicSample::values).collect();
    let n = rows.len() as f64;
    let mut out = [0.0; VECTOR_LEN];
    for f in 0..FEATURE_COUNT {
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in &rows {
            sum += r[f];
            lo = lo.min(r[f]);
            hi = hi.max(r[f]);
        }
        let mean = sum / n;
        let mut ss = 0.0;
        for r in &rows {
            let d = r[f] - mean;
            ss += d * d;
        }
        // rounding can push the mean a hair outside [min, max] for near-constant columns
        out[vector_index(f, Stat::Avg)] = mean.clamp(lo, hi);
        out[vector_index(f, Stat::Min)] = lo;
        out[vector_index(f, Stat::Max)] = hi;
        out[vector_index(f, Stat::Std)] = (ss / n).sqrt();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureVector {
    pub user_id: String,
    pub game: Game,
    /// [`VECTOR_LEN`] values ordered as [`feature_names`].
    pub values: Vec<f64>,
}

/// Runs kinematics, merging, windowing and aggregation for one user log.
pub fn featurize(log: &UserLog, window: usize, order: SampleOrder, exec: Execution) -> Result<Vec<GestureVector>> {
    let per_finger = exec.map(&log.streams, compute_kinematics).into_iter().collect::<Result<Vec<_>>>()?;
    let samples = combine_fingers(per_finger, order);
    let windows = window_gestures(&samples, window)?;
    exec.map(&windows, |w| aggregate(w))
        .into_iter()
        .map(|v| Ok(GestureVector { user_id: log.user_id.clone(), game: log.game, values: v?.to_vec() }))
        .collect()
}

/// Gesture vectors as CSV: `user_id,game` then the 44 named feature columns.
pub fn vectors_csv(vectors: &[GestureVector]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["user_id".to_string(), "game".to_string()];
    header.extend(feature_names());
    w.write_record(&header)?;
    for v in vectors {
        let mut rec = vec![v.user_id.clone(), v.game.to_string()];
        rec.extend(v.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_vectors_csv(text: &str) -> Result<Vec<GestureVector>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut expected = vec!["user_id".to_string(), "game".to_string()];
    expected.extend(feature_names());
    if header != expected {
        return Err(Error::Format("gesture vector CSV header does not match the expected columns".into()));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(GestureVector { user_id: rec[0].to_string(), game: rec[1].parse()?, values });
    }
    Ok(out)
}
