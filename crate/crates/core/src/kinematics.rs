//! Per-event kinematic features, computed within a single finger's stream.
//!
//! Every derivative is a first difference over the event's own time step.
//! Speeds need one prior event, accelerations and angular velocity two,
//! jerk three, so the first three events of a stream yield no sample.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Finger, FingerStream, TouchEvent};

/// Events consumed before the first fully defined sample.
pub const WARM_UP: usize = 3;

pub const FEATURE_COUNT: usize = 11;

/// The eleven per-event features, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feature {
    XSpeed,
    YSpeed,
    Speed,
    XAccel,
    YAccel,
    Accel,
    Jerk,
    PathTangent,
    AngularVelocity,
    TouchMajor,
    TouchMinor,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::XSpeed,
        Feature::YSpeed,
        Feature::Speed,
        Feature::XAccel,
        Feature::YAccel,
        Feature::Accel,
        Feature::Jerk,
        Feature::PathTangent,
        Feature::AngularVelocity,
        Feature::TouchMajor,
        Feature::TouchMinor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::XSpeed => "x_speed",
            Feature::YSpeed => "y_speed",
            Feature::Speed => "speed",
            Feature::XAccel => "x_accel",
            Feature::YAccel => "y_accel",
            Feature::Accel => "accel",
            Feature::Jerk => "jerk",
            Feature::PathTangent => "path_tangent",
            Feature::AngularVelocity => "angular_velocity",
            Feature::TouchMajor => "touch_major",
            Feature::TouchMinor => "touch_minor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSample {
    pub timestamp: f64,
    pub finger: Finger,
    pub x_speed: f64,
    pub y_speed: f64,
    pub speed: f64,
    pub x_accel: f64,
    pub y_accel: f64,
    pub accel: f64,
    pub jerk: f64,
    /// Movement direction in (-π, π].
    pub path_tangent: f64,
    pub angular_velocity: f64,
    pub touch_major: f64,
    /// Always equal to `touch_major`; the capture only reports one contact axis.
    pub touch_minor: f64,
}

impl KinematicSample {
    pub fn values(&self) -> [f64; FEATURE_COUNT] {
        [
            self.x_speed,
            self.y_speed,
            self.speed,
            self.x_accel,
            self.y_accel,
            self.accel,
            self.jerk,
            self.path_tangent,
            self.angular_velocity,
            self.touch_major,
            self.touch_minor,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.timestamp.is_finite() && self.values().iter().all(|v| v.is_finite())
    }
}

/// Wraps an angle difference into (-π, π].
pub fn wrap_angle(delta: f64) -> f64 {
    let r = delta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Direction of travel in (-π, π].
pub fn path_tangent(dx: f64, dy: f64) -> f64 {
    let theta = dy.atan2(dx);
    if theta <= -PI {
        theta + TAU
    } else {
        theta
    }
}

/// Position change per unit time between two consecutive events.
pub fn velocity(prev: &TouchEvent, cur: &TouchEvent) -> (f64, f64) {
    let dt = cur.timestamp - prev.timestamp;
    ((cur.x - prev.x) / dt, (cur.y - prev.y) / dt)
}

/// Computes kinematic samples for one stream, one per event from index
/// [`WARM_UP`] onward. Streams shorter than four events give no samples.
pub fn compute_kinematics(stream: &FingerStream) -> Result<Vec<KinematicSample>> {
    let ev = &stream.events;
    if let Some(i) = ev.windows(2).position(|w| w[1].timestamp <= w[0].timestamp) {
        return Err(Error::Contract(format!(
            "finger {} timestamps not strictly increasing at event {} ({} then {})",
            stream.finger,
            i + 1,
            ev[i].timestamp,
            ev[i + 1].timestamp
        )));
    }
    if ev.len() <= WARM_UP {
        log::warn!("finger {} stream has {} events; no kinematic samples", stream.finger, ev.len());
        return Ok(Vec::new());
    }

    let mut out = Vec::with_capacity(ev.len() - WARM_UP);
    // previous values of first and second differences
    let (mut vx_prev, mut vy_prev, mut s_prev, mut theta_prev) = (0.0, 0.0, 0.0, 0.0);
    let mut a_prev = 0.0;
    for i in 1..ev.len() {
        let dt = ev[i].timestamp - ev[i - 1].timestamp;
        let dx = ev[i].x - ev[i - 1].x;
        let dy = ev[i].y - ev[i - 1].y;
        let (vx, vy) = velocity(&ev[i - 1], &ev[i]);
        let s = (vx * vx + vy * vy).sqrt();
        let theta = path_tangent(dx, dy);
        if i >= 2 {
            let ax = (vx - vx_prev) / dt;
            let ay = (vy - vy_prev) / dt;
            let a = (s - s_prev) / dt;
            let omega = wrap_angle(theta - theta_prev) / dt;
            if i >= WARM_UP {
                let jerk = (a - a_prev) / dt;
                let w = ev[i].width_major;
                out.push(KinematicSample {
                    timestamp: ev[i].timestamp,
                    finger: stream.finger,
                    x_speed: vx,
                    y_speed: vy,
                    speed: s,
                    x_accel: ax,
                    y_accel: ay,
                    accel: a,
                    jerk,
                    path_tangent: theta,
                    angular_velocity: omega,
                    touch_major: w,
                    touch_minor: w,
                });
            }
            a_prev = a;
        }
        vx_prev = vx;
        vy_prev = vy;
        s_prev = s;
        theta_prev = theta;
    }
    Ok(out)
}

/// Header of the per-sample CSV dump (13 columns).
pub fn csv_header() -> Vec<&'static str> {
    let mut h = vec!["timestamp", "finger"];
    h.extend(Feature::ALL.iter().map(|f| f.name()));
    h
}

pub fn samples_csv(samples: &[KinematicSample]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header())?;
    for s in samples {
        let mut rec = vec![s.timestamp.to_string(), s.finger.to_string()];
        rec.extend(s.values().iter().map(f64::to_string));
        w.write_record(rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
