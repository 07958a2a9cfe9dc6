use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use touchauth::classifiers::{gbt, svc};
use touchauth::ingest::FieldOrder;
use touchauth::pipeline::{ingest_source, run_pipeline, InputSpec, LogSource, PipelineConfig, ProfileSource};
use touchauth::synth::{generate_cohort, separable_profiles};
use touchauth::windowing::{featurize, SampleOrder};
use touchauth::{seed, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn rows(n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = seed::rng(11);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let y = x.iter().map(|r| f64::from(u8::from(r[0] + 0.5 * r[1] > 0.0))).collect();
    (x, y)
}

fn bench_featurize(c: &mut Criterion) {
    let logs = generate_cohort(&separable_profiles(2, 1), 20_000, Execution::Sequential).unwrap();
    let log = &logs[0];
    let ingested =
        ingest_source(&LogSource { name: log.file_name.clone(), text: log.contents.clone() }, &FieldOrder::default())
            .unwrap();
    let mut group = c.benchmark_group("featurize_20k_events");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| featurize(black_box(&ingested.log), 10, SampleOrder::Timestamp, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_gbt(c: &mut Criterion) {
    let (x, y) = rows(2000, 44);
    let cfg = gbt::GbtConfig { trees: 10, ..Default::default() };
    let mut group = c.benchmark_group("gbt_10_trees_2000x44");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| gbt::train(black_box(&x), &y, &cfg, exec).unwrap()));
    }
    group.finish();
}

fn bench_svc(c: &mut Criterion) {
    let (x, y) = rows(2500, 44);
    let cfg = svc::SvcConfig { max_iterations: 200, ..Default::default() };
    let mut group = c.benchmark_group("svc_200_iters_2500x44");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| svc::train(black_box(&x), &y, &cfg, exec).unwrap()));
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for users in [4usize, 8] {
        let mut cfg = PipelineConfig::new(InputSpec::Synth {
            profiles: ProfileSource::Inline(separable_profiles(users, 3)),
            n_events: 1500,
        });
        cfg.models = vec!["xgb".into(), "svc".into()];
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, users), &cfg, |b, cfg| {
                b.iter(|| run_pipeline(cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_featurize, bench_gbt, bench_svc, bench_pipeline);
criterion_main!(benches);
