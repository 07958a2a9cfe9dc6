//! Multi-finger touch-dynamics continuous authentication.
//!
//! The pipeline runs raw touch-event logs through cleaning, per-finger
//! kinematic feature extraction, fixed-size gesture windowing, balanced
//! authentic/imposter dataset assembly, three natively implemented binary
//! classifiers, and per-user evaluation reports.
//!
//! Data-parallel stages (per-stream kinematics, per-window aggregation,
//! split search, per-user jobs) go through [`exec::Execution`], which uses
//! rayon when the `parallel` feature is enabled and falls back to plain
//! iteration otherwise. Results are identical in both modes.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod ingest;
pub mod kinematics;
pub mod manifest;
pub mod pipeline;
pub mod seed;
pub mod synth;
pub mod windowing;

pub use error::{Error, Result};
pub use exec::Execution;
