//! End-to-end run: raw logs (or a synthetic cohort) to a metrics report.
//!
//! Users are evaluated within each game: the imposter pool for a target
//! consists of the other users' vectors from the same game. Every random
//! choice uses a seed derived from the run seed and a stage tag, so runs
//! are reproducible regardless of thread count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classifiers::{self, TrainConfig, Variant};
use crate::dataset::{build_dataset, split, Label};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate_report, evaluate_model, metrics, report_csv, GroupBy, Report, ReportRow};
use crate::exec::Execution;
use crate::ingest::{clean_stream, parse_log, parse_log_name, FieldOrder, Game, UserLog};
use crate::manifest::{FileDigest, RunManifest, MANIFEST_FILE};
use crate::seed;
use crate::synth::{generate_cohort, ProfileSet};
use crate::windowing::{featurize, GestureVector, SampleOrder, DEFAULT_WINDOW};

pub const REPORT_FILE: &str = "report.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSource {
    File(PathBuf),
    Inline(ProfileSet),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// Log files, or directories whose `*.txt` files are logs.
    Logs {
        paths: Vec<PathBuf>,
    },
    Synth {
        profiles: ProfileSource,
        n_events: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Seed for shuffling samples before windowing; `None` keeps time order.
    #[serde(default)]
    pub shuffle_rows: Option<u64>,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Column order for header-less logs, as a comma-separated list.
    #[serde(default)]
    pub field_order: Option<String>,
    #[serde(default)]
    pub train: TrainConfig,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_models() -> Vec<String> {
    Variant::ALL.iter().map(|v| v.label().to_ascii_lowercase()).collect()
}

fn default_threshold() -> f64 {
    0.5
}

impl PipelineConfig {
    pub fn new(input: InputSpec) -> Self {
        PipelineConfig {
            input,
            seed: 0,
            window: default_window(),
            train_fraction: default_train_fraction(),
            shuffle_rows: None,
            models: default_models(),
            threshold: default_threshold(),
            field_order: None,
            train: TrainConfig::default(),
            jobs: None,
        }
    }

    /// Accepts either a config document or a manifest from an earlier run,
    /// whose recorded parameters are replayed.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let value = match value.get("tool") {
            Some(_) => {
                let m = RunManifest::from_json(text)?;
                if m.command != "pipeline" {
                    return Err(Error::Config(format!("manifest is from '{}', not a pipeline run", m.command)));
                }
                m.parameters
            }
            None => value,
        };
        Ok(serde_json::from_value(value)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_json(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes relative input paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.input {
            InputSpec::Logs { paths } => paths.iter_mut().for_each(fix),
            InputSpec::Synth { profiles: ProfileSource::File(p), .. } => fix(p),
            InputSpec::Synth { .. } => {}
        }
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        let mut out: Vec<Variant> = self.models.iter().map(|m| m.parse()).collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn order(&self) -> Result<FieldOrder> {
        self.field_order.as_deref().map_or(Ok(FieldOrder::default()), str::parse)
    }

    pub fn sample_order(&self, user: &str, game: Game) -> SampleOrder {
        match self.shuffle_rows {
            Some(s) => SampleOrder::Shuffled(seed::derive(s, &format!("{user}/{game}"))),
            None => SampleOrder::Timestamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Config(format!("window must be at least 2, got {}", self.window)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction must be in (0, 1), got {}", self.train_fraction)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold must be in (0, 1), got {}", self.threshold)));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        self.variants()?;
        self.order()?;
        self.train.validate()
    }
}

/// A raw log held in memory with the file name it came from.
#[derive(Debug, Clone)]
pub struct LogSource {
    pub name: String,
    pub text: String,
}

fn collect_log_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|source| Error::Read { path: p.clone(), source })?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "txt"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no log files found".into()));
    }
    Ok(out)
}

pub fn read_sources(paths: &[PathBuf]) -> Result<Vec<LogSource>> {
    collect_log_paths(paths)?
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).map_err(|source| Error::Read { path: p.clone(), source })?;
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(LogSource { name, text })
        })
        .collect()
}

pub fn load_sources(input: &InputSpec, exec: Execution) -> Result<Vec<LogSource>> {
    match input {
        InputSpec::Logs { paths } => read_sources(paths),
        InputSpec::Synth { profiles, n_events } => {
            let set = match profiles {
                ProfileSource::File(p) => ProfileSet::load(p)?,
                ProfileSource::Inline(s) => s.clone(),
            };
            Ok(generate_cohort(&set, *n_events, exec)?
                .into_iter()
                .map(|g| LogSource { name: g.file_name, text: g.contents })
                .collect())
        }
    }
}

/// Outcome of parsing and cleaning one log.
#[derive(Debug, Clone)]
pub struct IngestedLog {
    pub name: String,
    pub log: UserLog,
    pub events: usize,
    pub skipped_lines: usize,
    pub dropped_duplicates: usize,
}

pub fn ingest_source(src: &LogSource, order: &FieldOrder) -> Result<IngestedLog> {
    let (user, game) = parse_log_name(Path::new(&src.name))?;
    let parsed = parse_log(&src.text, order)?;
    for d in &parsed.diagnostics {
        log::warn!("{}:{}: {}", src.name, d.line, d.reason);
    }
    let events = parsed.events.len();
    let skipped_lines = parsed.skipped();
    let cleaned = clean_stream(parsed.events);
    for w in &cleaned.warnings {
        log::warn!("{}: {w}", src.name);
    }
    Ok(IngestedLog {
        name: src.name.clone(),
        log: UserLog::new(user, game, cleaned.streams)?,
        events,
        skipped_lines,
        dropped_duplicates: cleaned.dropped,
    })
}

#[derive(Debug, Clone, Serialize)]
struct ClassCounts {
    authentic: usize,
    imposter: usize,
}

#[derive(Debug, Clone, Serialize)]
struct DatasetRecord {
    user: String,
    game: Game,
    enrolled: usize,
    imposter_pool: usize,
    dataset_seed: u64,
    split_seed: u64,
    train: ClassCounts,
    test: ClassCounts,
}

#[derive(Debug, Clone, Serialize)]
struct ModelRecord {
    user: String,
    game: Game,
    model: String,
    seed: u64,
    converged: bool,
    iterations: usize,
}

struct JobOutput {
    dataset: DatasetRecord,
    models: Vec<ModelRecord>,
    rows: Vec<ReportRow>,
}

fn run_job(
    cfg: &PipelineConfig,
    variants: &[Variant],
    game: Game,
    user: &str,
    vectors: &[GestureVector],
    exec: Execution,
) -> Result<JobOutput> {
    let dataset_seed = seed::derive(cfg.seed, &format!("dataset/{game}/{user}"));
    let split_seed = seed::derive(cfg.seed, &format!("split/{game}/{user}"));
    let pool = build_dataset(user, vectors, dataset_seed)?;
    let (train, test) = split(&pool, cfg.train_fraction, split_seed)?;
    let counts = |ds: &crate::dataset::LabeledDataset| ClassCounts {
        authentic: ds.count(Label::Authentic),
        imposter: ds.count(Label::Imposter),
    };
    let dataset = DatasetRecord {
        user: user.to_string(),
        game,
        enrolled: pool.enrolled,
        imposter_pool: pool.imposter_pool,
        dataset_seed,
        split_seed,
        train: counts(&train),
        test: counts(&test),
    };
    let (x, y) = (train.features(), train.labels());
    let mut models = Vec::new();
    let mut rows = Vec::new();
    for &v in variants {
        let model_seed = seed::derive(cfg.seed, &format!("model/{game}/{user}/{v}"));
        let model = classifiers::train(v, &x, &y, &cfg.train, model_seed, exec)?;
        let m = metrics(&evaluate_model(&model, &test, cfg.threshold)?)?;
        let log = model.training_log();
        models.push(ModelRecord {
            user: user.to_string(),
            game,
            model: v.label().into(),
            seed: model_seed,
            converged: log.converged,
            iterations: log.iterations,
        });
        rows.push(ReportRow::from_metrics(user, game.as_str(), v.label(), &m));
    }
    Ok(JobOutput { dataset, models, rows })
}

/// Everything a pipeline run produces, before anything touches disk.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: Report,
    pub report_csv: String,
    pub manifest: RunManifest,
}

pub fn run_pipeline(cfg: &PipelineConfig, exec: Execution) -> Result<PipelineOutput> {
    cfg.validate()?;
    exec.with_jobs(cfg.jobs, || run_inner(cfg, exec))
}

fn run_inner(cfg: &PipelineConfig, exec: Execution) -> Result<PipelineOutput> {
    let variants = cfg.variants()?;
    let order = cfg.order()?;
    let sources = load_sources(&cfg.input, exec)?;
    let ingested = exec.map(&sources, |s| ingest_source(s, &order)).into_iter().collect::<Result<Vec<_>>>()?;

    let mut by_game: BTreeMap<Game, BTreeMap<String, usize>> = BTreeMap::new();
    for (i, ing) in ingested.iter().enumerate() {
        let users = by_game.entry(ing.log.game).or_default();
        if users.insert(ing.log.user_id.clone(), i).is_some() {
            return Err(Error::Config(format!("more than one log for user '{}' in {}", ing.log.user_id, ing.log.game)));
        }
    }
    let featurized = exec
        .map(&ingested, |ing| featurize(&ing.log, cfg.window, cfg.sample_order(&ing.log.user_id, ing.log.game), exec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut game_vectors: BTreeMap<Game, Vec<GestureVector>> = BTreeMap::new();
    let mut jobs: Vec<(Game, String)> = Vec::new();
    for (game, users) in &by_game {
        if users.len() < 2 {
            return Err(Error::InsufficientData(format!("{game} has a single user; imposter data needs at least two")));
        }
        let pooled = game_vectors.entry(*game).or_default();
        for (user, &i) in users {
            pooled.extend(featurized[i].iter().cloned());
            jobs.push((*game, user.clone()));
        }
    }
    let outputs = exec
        .map(&jobs, |(game, user)| run_job(cfg, &variants, *game, user, &game_vectors[game], exec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut datasets = Vec::new();
    let mut models = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        datasets.push(o.dataset);
        models.extend(o.models);
    }
    let report = aggregate_report(&rows, GroupBy::ModelGame);
    let report_csv = report_csv(&report)?;

    let logs: Vec<_> = ingested
        .iter()
        .zip(&featurized)
        .map(|(ing, v)| {
            json!({
                "file": ing.name,
                "user": ing.log.user_id,
                "game": ing.log.game,
                "events": ing.events,
                "skipped_lines": ing.skipped_lines,
                "dropped_duplicates": ing.dropped_duplicates,
                "vectors": v.len(),
            })
        })
        .collect();
    let mut manifest = RunManifest::new("pipeline", serde_json::to_value(cfg)?);
    manifest.inputs = sources.iter().map(|s| FileDigest::of_bytes(&s.name, s.text.as_bytes())).collect();
    manifest.outputs = vec![FileDigest::of_bytes(REPORT_FILE, report_csv.as_bytes())];
    manifest.records = json!({ "logs": logs, "datasets": datasets, "models": models });
    Ok(PipelineOutput { report, report_csv, manifest })
}

/// Writes a set of files into `dir`. If any write fails, the files already
/// written (and `dir`, if this call created it) are removed.
pub fn write_outputs(dir: &Path, files: &[(&str, &str)]) -> Result<()> {
    let created = !dir.exists();
    std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(source) = std::fs::write(&path, contents) {
            for w in &written {
                let _ = std::fs::remove_file(w);
            }
            if created {
                let _ = std::fs::remove_dir_all(dir);
            }
            return Err(Error::Write { path, source });
        }
        written.push(path);
    }
    Ok(())
}

impl PipelineOutput {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let manifest = self.manifest.to_json()?;
        write_outputs(dir, &[(REPORT_FILE, &self.report_csv), (MANIFEST_FILE, &manifest)])
    }
}
