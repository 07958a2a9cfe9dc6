//! Synthetic two-finger touch logs from parameterized behavior profiles.
//!
//! Each finger follows a bounded random walk with heading persistence: the
//! heading drifts by a Gaussian increment scaled by the direction-change
//! rate, steps have length `speed_scale * mean_interval`, and walls reflect
//! both position and heading. Output is written in the ingest text format
//! so generated data always goes through the parser.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::{write_log, ButtonState, FieldOrder, Finger, Game, TouchEvent, MIN_STREAM_EVENTS};
use crate::seed;

/// Landscape screen extent in pixels.
pub const SCREEN_WIDTH: f64 = 2880.0;
pub const SCREEN_HEIGHT: f64 = 1440.0;

/// Smallest value emitted for pressure and contact width.
const MIN_POSITIVE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorProfile {
    pub id: String,
    /// Mean time between events of one finger, seconds.
    pub mean_interval: f64,
    /// Intervals are uniform in `mean_interval * (1 ± jitter)`.
    pub jitter: f64,
    /// Pixels per second.
    pub speed_scale: f64,
    /// Standard deviation of the per-event heading change, radians.
    pub direction_change_rate: f64,
    pub pressure_mean: f64,
    pub pressure_std: f64,
    pub width_major_mean: f64,
    pub width_major_std: f64,
    /// Start delay of finger 1 relative to finger 0, seconds.
    pub phase_offset: f64,
    pub seed: u64,
}

impl BehaviorProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("profile '{}': {msg}", self.id)));
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id.chars().any(char::is_whitespace) {
            return Err(Error::Config(format!("profile id '{}' must be non-empty and file-name safe", self.id)));
        }
        if !(self.mean_interval > 0.0 && self.mean_interval.is_finite()) {
            return bad("mean_interval must be positive");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return bad("jitter must be in [0, 1)");
        }
        if !(self.speed_scale > 0.0 && self.speed_scale.is_finite()) {
            return bad("speed_scale must be positive");
        }
        if !(self.direction_change_rate >= 0.0 && self.direction_change_rate.is_finite()) {
            return bad("direction_change_rate must be non-negative");
        }
        if !(self.pressure_mean > 0.0 && self.width_major_mean > 0.0) {
            return bad("pressure and width_major means must be positive");
        }
        if !(self.pressure_std >= 0.0 && self.width_major_std >= 0.0) {
            return bad("standard deviations must be non-negative");
        }
        if !(self.phase_offset >= 0.0 && self.phase_offset.is_finite()) {
            return bad("phase_offset must be non-negative");
        }
        Ok(())
    }
}

struct FingerWalk {
    x: f64,
    y: f64,
    heading: f64,
    clock: f64,
}

impl FingerWalk {
    fn step(&mut self, len: f64) {
        self.x += len * self.heading.cos();
        self.y += len * self.heading.sin();
        if self.x < 0.0 || self.x > SCREEN_WIDTH {
            self.x = if self.x < 0.0 { -self.x } else { 2.0 * SCREEN_WIDTH - self.x };
            self.heading = PI - self.heading;
        }
        if self.y < 0.0 || self.y > SCREEN_HEIGHT {
            self.y = if self.y < 0.0 { -self.y } else { 2.0 * SCREEN_HEIGHT - self.y };
            self.heading = -self.heading;
        }
    }
}

fn positive_normal(mean: f64, std: f64, rng: &mut seed::Rng) -> f64 {
    let v = if std > 0.0 { Normal::new(mean, std).expect("validated std").sample(rng) } else { mean };
    v.max(MIN_POSITIVE)
}

/// Generates `n_events` events alternating between the two fingers.
pub fn generate_events(profile: &BehaviorProfile, n_events: usize) -> Result<Vec<TouchEvent>> {
    profile.validate()?;
    if n_events < MIN_STREAM_EVENTS {
        return Err(Error::Config(format!("n_events must be at least {MIN_STREAM_EVENTS}, got {n_events}")));
    }
    let mut rng = seed::rng(profile.seed);
    let mut walks: Vec<FingerWalk> = (0..2)
        .map(|f| FingerWalk {
            x: SCREEN_WIDTH * if f == 0 { 0.3 } else { 0.7 },
            y: SCREEN_HEIGHT * 0.5,
            heading: rng.random_range(-PI..PI),
            clock: f as f64 * profile.phase_offset,
        })
        .collect();
    let step_len = profile.speed_scale * profile.mean_interval;
    let mut events = Vec::with_capacity(n_events);
    for k in 0..n_events {
        let f = k % 2;
        let w = &mut walks[f];
        let jitter = if profile.jitter > 0.0 { rng.random_range(-profile.jitter..profile.jitter) } else { 0.0 };
        w.clock += profile.mean_interval * (1.0 + jitter);
        let turn: f64 = StandardNormal.sample(&mut rng);
        w.heading += profile.direction_change_rate * turn;
        w.step(step_len);
        let (timestamp, x, y) = (w.clock, w.x, w.y);
        let button = if k < 2 {
            ButtonState::Down
        } else if k + 2 >= n_events {
            ButtonState::Up
        } else {
            ButtonState::Held
        };
        events.push(TouchEvent {
            timestamp,
            x,
            y,
            button,
            width_major: positive_normal(profile.width_major_mean, profile.width_major_std, &mut rng),
            orientation: rng.random_range(0.0..32.0),
            pressure: positive_normal(profile.pressure_mean, profile.pressure_std, &mut rng),
            finger: if f == 0 { Finger::Zero } else { Finger::One },
        });
    }
    events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.finger.cmp(&b.finger)));
    Ok(events)
}

/// One raw log in the ingest text format. Byte-identical for the same
/// `(profile, n_events)`.
pub fn generate_log(profile: &BehaviorProfile, n_events: usize) -> Result<String> {
    Ok(write_log(&generate_events(profile, n_events)?, &FieldOrder::default()))
}

/// A cohort definition as stored in a profile JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSet {
    #[serde(default = "default_games")]
    pub games: Vec<Game>,
    pub profiles: Vec<BehaviorProfile>,
}

fn default_games() -> Vec<Game> {
    vec![Game::Pubg]
}

impl ProfileSet {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// A generated log file: `<id>_<game>.txt` and its contents.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedLog {
    pub file_name: String,
    pub contents: String,
}

/// One log per profile per game. Each game uses a seed derived from the
/// profile seed and the game name.
pub fn generate_cohort(set: &ProfileSet, n_events: usize, exec: Execution) -> Result<Vec<GeneratedLog>> {
    if set.profiles.len() < 2 {
        return Err(Error::Config(format!("a cohort needs at least 2 profiles, got {}", set.profiles.len())));
    }
    if set.games.is_empty() {
        return Err(Error::Config("a cohort needs at least one game".into()));
    }
    let mut ids = HashSet::new();
    for p in &set.profiles {
        if !ids.insert(p.id.as_str()) {
            return Err(Error::Config(format!("duplicate profile id '{}'", p.id)));
        }
    }
    let jobs: Vec<(&BehaviorProfile, Game)> =
        set.profiles.iter().flat_map(|p| set.games.iter().map(move |g| (p, *g))).collect();
    exec.map(&jobs, |(p, g)| {
        let mut prof = (*p).clone();
        prof.seed = seed::derive(p.seed, g.as_str());
        Ok(GeneratedLog { file_name: format!("{}_{}.txt", p.id, g), contents: generate_log(&prof, n_events)? })
    })
    .into_iter()
    .collect()
}

pub fn write_cohort(dir: &Path, logs: &[GeneratedLog]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    logs.iter()
        .map(|l| {
            let path = dir.join(&l.file_name);
            std::fs::write(&path, &l.contents).map_err(|source| Error::Write { path: path.clone(), source })?;
            Ok(path)
        })
        .collect()
}

fn base_profile(id: String, seed: u64) -> BehaviorProfile {
    BehaviorProfile {
        id,
        mean_interval: 0.008,
        jitter: 0.3,
        speed_scale: 400.0,
        direction_change_rate: 0.8,
        pressure_mean: 20.0,
        pressure_std: 2.0,
        width_major_mean: 18.0,
        width_major_std: 1.0,
        phase_offset: 0.004,
        seed,
    }
}

/// Profiles that differ clearly in speed, contact size, pressure, timing and
/// turning. Each parameter orders the users differently, so no user sits
/// between two others on every axis.
pub fn separable_profiles(count: usize, seed: u64) -> ProfileSet {
    let n = count.max(1);
    let level = |k: usize, stride: usize, offset: usize| ((stride * k + offset) % n) as f64 / n as f64;
    let profiles = (0..count)
        .map(|k| {
            let mut p = base_profile(format!("u{:02}", k + 1), seed::derive(seed, &format!("separable/{k}")));
            p.speed_scale = 200.0 + 2000.0 * level(k, 1, 0);
            p.width_major_mean = 10.0 + 30.0 * level(k, 3, 1);
            p.pressure_mean = 15.0 + 40.0 * level(k, 3, 1);
            p.mean_interval = 0.006 + 0.006 * level(k, 5, 2);
            p.direction_change_rate = 0.3 + 1.2 * level(k, 7, 3);
            p
        })
        .collect();
    ProfileSet { games: default_games(), profiles }
}

/// Profiles that differ only in their seed.
pub fn identical_profiles(count: usize, seed: u64) -> ProfileSet {
    let profiles = (0..count)
        .map(|k| base_profile(format!("u{:02}", k + 1), seed::derive(seed, &format!("identical/{k}"))))
        .collect();
    ProfileSet { games: default_games(), profiles }
}
