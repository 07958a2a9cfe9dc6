//! Generated logs taken through the real parser and feature stages.

use touchauth::ingest::FieldOrder;
use touchauth::kinematics::Feature;
use touchauth::pipeline::{ingest_source, LogSource};
use touchauth::synth::{generate_cohort, separable_profiles, BehaviorProfile, ProfileSet};
use touchauth::windowing::{featurize, vector_index, SampleOrder, Stat};
use touchauth::{seed, Execution};

fn profile(id: &str, speed: f64, seed: u64) -> BehaviorProfile {
    let mut p = separable_profiles(1, seed).profiles.remove(0);
    p.id = id.into();
    p.speed_scale = speed;
    p
}

fn mean_speed_avg(p: &BehaviorProfile) -> f64 {
    let set = ProfileSet {
        games: vec![touchauth::ingest::Game::Pubg],
        profiles: vec![p.clone(), profile("other", 500.0, 0)],
    };
    let log = generate_cohort(&set, 2000, Execution::Sequential).unwrap().remove(0);
    let ingested =
        ingest_source(&LogSource { name: log.file_name, text: log.contents }, &FieldOrder::default()).unwrap();
    let vectors = featurize(&ingested.log, 10, SampleOrder::Timestamp, Execution::Sequential).unwrap();
    let col = vector_index(Feature::Speed as usize, Stat::Avg);
    vectors.iter().map(|v| v.values[col]).sum::<f64>() / vectors.len() as f64
}

#[test]
fn faster_profile_has_higher_speed_feature() {
    for k in 0..5 {
        let base = seed::derive(99, &k.to_string());
        let slow = mean_speed_avg(&profile("a", 100.0, base));
        let fast = mean_speed_avg(&profile("b", 1000.0, base ^ 1));
        // step length is speed_scale * mean_interval, so the ratio is close to 10
        assert!(fast > 5.0 * slow, "seed {k}: {fast} vs {slow}");
    }
}

#[test]
fn every_generated_log_parses_without_diagnostics() {
    let set = separable_profiles(4, 3);
    for log in generate_cohort(&set, 1500, Execution::Parallel).unwrap() {
        let parsed = touchauth::ingest::parse_log(&log.contents, &FieldOrder::default()).unwrap();
        assert!(parsed.diagnostics.is_empty(), "{}", log.file_name);
        assert_eq!(parsed.events.len(), 1500);
        assert!(parsed.events.iter().all(|e| e.pressure > 0.0 && e.width_major > 0.0));
    }
}
