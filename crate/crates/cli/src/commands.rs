use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::json;

use touchauth::classifiers::{self, TrainConfig, TrainedModel, Variant};
use touchauth::dataset::{build_dataset, dataset_csv, parse_dataset_csv, split, Label};
use touchauth::evaluation::{
    aggregate_report, confusion, metrics, parse_report_rows, report_csv, GroupBy, Report, ReportRow,
};
use touchauth::ingest::{clean_stream, diagnostics_csv, parse_log, write_log, FieldOrder, Game};
use touchauth::manifest::{FileDigest, RunManifest, MANIFEST_FILE};
use touchauth::pipeline::{
    ingest_source, read_sources, run_pipeline, write_outputs, LogSource, PipelineConfig, REPORT_FILE,
};
use touchauth::synth::{generate_cohort, ProfileSet};
use touchauth::windowing::{featurize, parse_vectors_csv, vectors_csv, GestureVector, SampleOrder};
use touchauth::{seed, Error, Execution, Result};

use crate::Command;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn field_order(arg: Option<&str>) -> Result<FieldOrder> {
    arg.map_or(Ok(FieldOrder::default()), str::parse)
}

/// Artifacts of one command, written together with the manifest.
struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn finish(self, dir: &Path, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.files.iter().map(|(n, c)| FileDigest::of_bytes(n, c.as_bytes())).collect();
        let manifest = manifest.to_json()?;
        let mut all: Vec<(&str, &str)> = self.files.iter().map(|(n, c)| (n.as_str(), c.as_str())).collect();
        all.push((MANIFEST_FILE, &manifest));
        write_outputs(dir, &all)?;
        log::info!("wrote {} files to {}", all.len(), dir.display());
        Ok(())
    }
}

fn digests(sources: &[LogSource]) -> Vec<FileDigest> {
    sources.iter().map(|s| FileDigest::of_bytes(&s.name, s.text.as_bytes())).collect()
}

pub fn dispatch(command: Command, exec: Execution, jobs: Option<usize>) -> Result<()> {
    match command {
        Command::Ingest { paths, order, out } => ingest(&paths, order.field_order.as_deref(), &out),
        Command::Featurize { paths, order, window, shuffle_rows, out } => {
            featurize_cmd(&paths, order.field_order.as_deref(), window, shuffle_rows, &out, exec)
        }
        Command::Dataset { vectors, user, game, seed, train_fraction, out } => {
            dataset(&vectors, &user, game.as_deref(), seed, train_fraction, &out)
        }
        Command::Train { data, model, seed, config, out } => train(&data, &model, seed, config.as_deref(), &out, exec),
        Command::Evaluate { model, data, user, game, threshold, out } => {
            evaluate(&model, &data, &user, &game, threshold, &out)
        }
        Command::Report { inputs, group_by, out } => report(&inputs, &group_by, &out),
        Command::Synth { profiles, n_events, out } => synth(&profiles, n_events, &out, exec),
        Command::Pipeline { config, seed, window, train_fraction, shuffle_rows, models, threshold, order, out } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = window {
                cfg.window = v;
            }
            if let Some(v) = train_fraction {
                cfg.train_fraction = v;
            }
            if shuffle_rows.is_some() {
                cfg.shuffle_rows = shuffle_rows;
            }
            if let Some(v) = models {
                cfg.models = v;
            }
            if let Some(v) = threshold {
                cfg.threshold = v;
            }
            if order.field_order.is_some() {
                cfg.field_order = order.field_order;
            }
            if jobs.is_some() {
                cfg.jobs = jobs;
            }
            let output = run_pipeline(&cfg, exec)?;
            output.write(&out)?;
            println!("{}", output.report_csv.trim_end());
            Ok(())
        }
    }
}

fn ingest(paths: &[PathBuf], order: Option<&str>, out: &Path) -> Result<()> {
    let order = field_order(order)?;
    let sources = read_sources(paths)?;
    let mut outputs = Outputs::new();
    let mut records = Vec::new();
    for src in &sources {
        let stem = Path::new(&src.name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let parsed = parse_log(&src.text, &order)?;
        if parsed.events.is_empty() {
            log::warn!("{}: no events", src.name);
        }
        for d in &parsed.diagnostics {
            log::warn!("{}:{}: {}", src.name, d.line, d.reason);
        }
        let (read, skipped) = (parsed.events.len(), parsed.skipped());
        let cleaned = clean_stream(parsed.events);
        for w in &cleaned.warnings {
            log::warn!("{}: {w}", src.name);
        }
        let mut events: Vec<_> = cleaned.streams.iter().flat_map(|s| s.events.iter().cloned()).collect();
        events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.finger.cmp(&b.finger)));
        records.push(json!({
            "file": src.name,
            "events": read,
            "skipped_lines": skipped,
            "dropped_duplicates": cleaned.dropped,
            "kept": events.len(),
        }));
        outputs.add(format!("{stem}.cleaned.txt"), write_log(&events, &parsed.order));
        outputs.add(format!("{stem}.diagnostics.csv"), diagnostics_csv(&parsed.diagnostics)?);
    }
    let mut manifest = RunManifest::new("ingest", json!({ "field_order": order.header_line() }));
    manifest.inputs = digests(&sources);
    manifest.records = json!({ "logs": records });
    outputs.finish(out, manifest)
}

fn featurize_cmd(
    paths: &[PathBuf],
    order: Option<&str>,
    window: usize,
    shuffle: Option<u64>,
    out: &Path,
    exec: Execution,
) -> Result<()> {
    let order = field_order(order)?;
    let sources = read_sources(paths)?;
    let mut vectors: Vec<GestureVector> = Vec::new();
    let mut records = Vec::new();
    for src in &sources {
        let ing = ingest_source(src, &order)?;
        let mode = match shuffle {
            Some(s) => SampleOrder::Shuffled(seed::derive(s, &format!("{}/{}", ing.log.user_id, ing.log.game))),
            None => SampleOrder::Timestamp,
        };
        let v = featurize(&ing.log, window, mode, exec)?;
        records.push(json!({ "file": src.name, "user": ing.log.user_id, "game": ing.log.game, "sample_order": mode, "vectors": v.len() }));
        vectors.extend(v);
    }
    let mut outputs = Outputs::new();
    outputs.add("vectors.csv", vectors_csv(&vectors)?);
    let params = json!({ "field_order": order.header_line(), "window": window, "shuffle_rows": shuffle });
    let mut manifest = RunManifest::new("featurize", params);
    manifest.inputs = digests(&sources);
    manifest.records = json!({ "logs": records });
    outputs.finish(out, manifest)
}

fn dataset(paths: &[PathBuf], user: &str, game: Option<&str>, base_seed: u64, frac: f64, out: &Path) -> Result<()> {
    let game: Option<Game> = game.map(str::parse).transpose()?;
    let mut inputs = Vec::new();
    let mut vectors = Vec::new();
    for p in paths {
        let text = read_text(p)?;
        inputs.push(FileDigest::of_bytes(file_name(p), text.as_bytes()));
        vectors.extend(parse_vectors_csv(&text)?);
    }
    if let Some(g) = game {
        vectors.retain(|v| v.game == g);
    }
    let scope = game.map_or("all".to_string(), |g| g.to_string());
    let dataset_seed = seed::derive(base_seed, &format!("dataset/{scope}/{user}"));
    let split_seed = seed::derive(base_seed, &format!("split/{scope}/{user}"));
    let pool = build_dataset(user, &vectors, dataset_seed)?;
    let (train, test) = split(&pool, frac, split_seed)?;
    let counts = |ds: &touchauth::dataset::LabeledDataset| json!({ "authentic": ds.count(Label::Authentic), "imposter": ds.count(Label::Imposter) });
    let mut outputs = Outputs::new();
    outputs.add("train.csv", dataset_csv(&train)?);
    outputs.add("test.csv", dataset_csv(&test)?);
    let params = json!({ "user": user, "game": game, "seed": base_seed, "train_fraction": frac });
    let mut manifest = RunManifest::new("dataset", params);
    manifest.inputs = inputs;
    manifest.records = json!({
        "dataset_seed": dataset_seed,
        "split_seed": split_seed,
        "enrolled": pool.enrolled,
        "imposter_pool": pool.imposter_pool,
        "train": counts(&train),
        "test": counts(&test),
    });
    outputs.finish(out, manifest)
}

fn train(data: &Path, model: &str, model_seed: u64, config: Option<&Path>, out: &Path, exec: Execution) -> Result<()> {
    let variant: Variant = model.parse()?;
    let text = read_text(data)?;
    let mut inputs = vec![FileDigest::of_bytes(file_name(data), text.as_bytes())];
    let cfg: TrainConfig = match config {
        Some(p) => {
            let c = read_text(p)?;
            inputs.push(FileDigest::of_bytes(file_name(p), c.as_bytes()));
            serde_json::from_str(&c)?
        }
        None => TrainConfig::default(),
    };
    let (x, y) = parse_dataset_csv(&text)?;
    let trained = classifiers::train(variant, &x, &y, &cfg, model_seed, exec)?;
    let log = trained.training_log();
    if !log.converged {
        log::warn!("{} training stopped after {} iterations without converging", variant, log.iterations);
    }
    let mut outputs = Outputs::new();
    outputs.add("model.json", trained.to_json()?);
    let mut manifest =
        RunManifest::new("train", json!({ "model": variant.label(), "seed": model_seed, "config": cfg }));
    manifest.inputs = inputs;
    manifest.records = json!({ "rows": x.len(), "converged": log.converged, "iterations": log.iterations });
    outputs.finish(out, manifest)
}

fn evaluate(model_path: &Path, data: &Path, user: &str, game: &str, threshold: f64, out: &Path) -> Result<()> {
    let model_text = read_text(model_path)?;
    let model = TrainedModel::from_json(&model_text)?;
    let text = read_text(data)?;
    let (x, y) = parse_dataset_csv(&text)?;
    let predictions = x.iter().map(|r| model.classify(r, threshold).map(Label::as_u8)).collect::<Result<Vec<u8>>>()?;
    let truth: Vec<u8> = y.iter().map(|l| l.as_u8()).collect();
    let cm = confusion(&predictions, &truth)?;
    let m = metrics(&cm)?;
    if m.degenerate.any() {
        log::warn!("degenerate ratios reported as 0: {:?}", m.degenerate);
    }
    let row = ReportRow::from_metrics(user, game, model.variant().label(), &m);
    let mut outputs = Outputs::new();
    outputs.add("metrics.csv", report_csv(&Report { rows: vec![row], groups: Vec::new() })?);
    let mut manifest = RunManifest::new("evaluate", json!({ "user": user, "game": game, "threshold": threshold }));
    manifest.inputs = vec![
        FileDigest::of_bytes(file_name(model_path), model_text.as_bytes()),
        FileDigest::of_bytes(file_name(data), text.as_bytes()),
    ];
    manifest.records = json!({ "confusion": cm, "degenerate": m.degenerate });
    outputs.finish(out, manifest)
}

fn report(inputs: &[PathBuf], group_by: &str, out: &Path) -> Result<()> {
    let group_by: GroupBy = group_by.parse()?;
    let mut digests = Vec::new();
    let mut rows = Vec::new();
    for p in inputs {
        let text = read_text(p)?;
        digests.push(FileDigest::of_bytes(file_name(p), text.as_bytes()));
        rows.extend(parse_report_rows(&text)?);
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("no per-user rows in the inputs".into()));
    }
    let mut outputs = Outputs::new();
    outputs.add(REPORT_FILE, report_csv(&aggregate_report(&rows, group_by))?);
    let mut manifest = RunManifest::new("report", json!({ "group_by": group_by }));
    manifest.inputs = digests;
    outputs.finish(out, manifest)
}

fn synth(profiles: &Path, n_events: usize, out: &Path, exec: Execution) -> Result<()> {
    let text = read_text(profiles)?;
    let set: ProfileSet = serde_json::from_str(&text)?;
    let logs = generate_cohort(&set, n_events, exec)?;
    let users: BTreeSet<&str> = set.profiles.iter().map(|p| p.id.as_str()).collect();
    let mut outputs = Outputs::new();
    for l in &logs {
        outputs.add(l.file_name.clone(), l.contents.clone());
    }
    let mut manifest = RunManifest::new("synth", json!({ "n_events": n_events, "profiles": set }));
    manifest.inputs = vec![FileDigest::of_bytes(file_name(profiles), text.as_bytes())];
    manifest.records = json!({ "users": users, "files": logs.len() });
    outputs.finish(out, manifest)
}
