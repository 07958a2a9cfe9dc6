//! Acceptance gate. Runs every criterion at its stated tolerance, prints
//! one line per criterion, and exits non-zero if any blocking criterion
//! fails. Criterion 10 needs the original study recordings; point
//! `TOUCHAUTH_REFERENCE_DATA` at a directory of `<user>_<game>.txt` logs to run it.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use touchauth::classifiers::{self, gbt, mlp, svc, TrainConfig, Variant};
use touchauth::dataset::Label;
use touchauth::evaluation::{aggregate_report, metrics, ConfusionMatrix, GroupBy, ReportRow};
use touchauth::ingest::{ButtonState, Finger, FingerStream, TouchEvent};
use touchauth::kinematics::{compute_kinematics, KinematicSample, FEATURE_COUNT};
use touchauth::manifest::MANIFEST_FILE;
use touchauth::pipeline::{run_pipeline, InputSpec, PipelineConfig, ProfileSource, REPORT_FILE};
use touchauth::seed;
use touchauth::synth::{identical_profiles, separable_profiles};
use touchauth::windowing::{aggregate, vector_index, Stat, VECTOR_LEN};
use touchauth::Execution;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    blocking: bool,
}

type Check = Result<String, String>;

fn run(id: u32, name: &str, limit: Option<Duration>, check: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let (status, detail) = match result {
        Ok(d) => match limit {
            Some(l) if elapsed > l => (Status::Fail, format!("{d}; runtime {elapsed:.2?} exceeds {l:?}")),
            _ => (Status::Pass, d),
        },
        Err(d) => (Status::Fail, d),
    };
    let tag = match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skip => unreachable!(),
    };
    println!("[{tag}] {id:>2} {name} ({elapsed:.2?}): {detail}");
    Outcome { status, blocking: true }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

// ---------------------------------------------------------------- 1

fn random_stream(rng: &mut seed::Rng, len: usize) -> FingerStream {
    let mut t = rng.random_range(0.0..100.0);
    let (mut x, mut y) = (rng.random_range(0.0..2880.0), rng.random_range(0.0..1440.0));
    let events = (0..len)
        .map(|_| {
            t += rng.random_range(0.001..0.05);
            x += rng.random_range(-20.0..20.0);
            y += rng.random_range(-20.0..20.0);
            TouchEvent {
                timestamp: t,
                x,
                y,
                button: ButtonState::Held,
                width_major: rng.random_range(5.0..40.0),
                orientation: 0.0,
                pressure: 1.0,
                finger: Finger::Zero,
            }
        })
        .collect();
    FingerStream { finger: Finger::Zero, events }
}

/// Straight finite differences, one array per derivative order.
fn kinematics_oracle(s: &FingerStream) -> Vec<[f64; FEATURE_COUNT]> {
    let e = &s.events;
    let n = e.len();
    let t: Vec<f64> = e.iter().map(|e| e.timestamp).collect();
    let diff = |v: &[f64], i: usize| (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
    let xs: Vec<f64> = e.iter().map(|e| e.x).collect();
    let ys: Vec<f64> = e.iter().map(|e| e.y).collect();
    let mut vx = vec![f64::NAN; n];
    let mut vy = vec![f64::NAN; n];
    let mut sp = vec![f64::NAN; n];
    let mut th = vec![f64::NAN; n];
    for i in 1..n {
        vx[i] = diff(&xs, i);
        vy[i] = diff(&ys, i);
        sp[i] = vx[i].hypot(vy[i]);
        th[i] = (ys[i] - ys[i - 1]).atan2(xs[i] - xs[i - 1]);
        if th[i] == -std::f64::consts::PI {
            th[i] = std::f64::consts::PI;
        }
    }
    let mut ax = vec![f64::NAN; n];
    let mut ay = vec![f64::NAN; n];
    let mut ac = vec![f64::NAN; n];
    let mut om = vec![f64::NAN; n];
    for i in 2..n {
        ax[i] = diff(&vx, i);
        ay[i] = diff(&vy, i);
        ac[i] = diff(&sp, i);
        let d = th[i] - th[i - 1];
        om[i] = d.sin().atan2(d.cos()) / (t[i] - t[i - 1]);
    }
    (3..n)
        .map(|i| {
            let jerk = diff(&ac, i);
            let w = e[i].width_major;
            [vx[i], vy[i], sp[i], ax[i], ay[i], ac[i], jerk, th[i], om[i], w, w]
        })
        .collect()
}

fn criterion_1() -> Check {
    let mut rng = seed::rng(1);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let len = rng.random_range(4..=200);
        let stream = random_stream(&mut rng, len);
        let got = compute_kinematics(&stream).map_err(|e| e.to_string())?;
        let want = kinematics_oracle(&stream);
        ensure(got.len() == len - 3, || format!("case {case}: {} samples for {len} events", got.len()))?;
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            for (f, (a, b)) in g.values().iter().zip(w).enumerate() {
                let e = rel_err(*a, *b, 1.0);
                worst = worst.max(e);
                ensure(e <= 1e-9, || format!("case {case} sample {k} feature {f}: {a} vs {b}"))?;
            }
        }
    }
    Ok(format!("1000 streams, worst relative error {worst:.2e} (limit 1e-9)"))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Check {
    let mut rng = seed::rng(2);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let window: Vec<KinematicSample> = (0..10)
            .map(|i| {
                let mut v = [0.0; FEATURE_COUNT];
                for x in &mut v {
                    *x = rng.random_range(-1000.0..1000.0);
                }
                KinematicSample {
                    timestamp: i as f64,
                    finger: Finger::Zero,
                    x_speed: v[0],
                    y_speed: v[1],
                    speed: v[2],
                    x_accel: v[3],
                    y_accel: v[4],
                    accel: v[5],
                    jerk: v[6],
                    path_tangent: v[7],
                    angular_velocity: v[8],
                    touch_major: v[9],
                    touch_minor: v[10],
                }
            })
            .collect();
        let got = aggregate(&window).map_err(|e| e.to_string())?;
        ensure(got.len() == VECTOR_LEN, || "wrong vector length".into())?;
        for f in 0..FEATURE_COUNT {
            let col: Vec<f64> = window.iter().map(|s| s.values()[f]).collect();
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let min = col.iter().copied().fold(f64::INFINITY, f64::min);
            let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (stat, want) in [(Stat::Avg, mean), (Stat::Min, min), (Stat::Max, max), (Stat::Std, var.sqrt())] {
                let e = (got[vector_index(f, stat)] - want).abs();
                worst = worst.max(e);
                ensure(e <= 1e-12, || {
                    format!("case {case} feature {f} {stat:?}: {} vs {want}", got[vector_index(f, stat)])
                })?;
            }
        }
    }
    Ok(format!("1000 windows, worst absolute error {worst:.2e} (limit 1e-12)"))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Check {
    type Q = Ratio<u64>;
    let to_f = |q: Q| *q.numer() as f64 / *q.denom() as f64;
    let frac =
        |n: usize, d: usize| if d == 0 { (Q::from_integer(0), true) } else { (Q::new(n as u64, d as u64), false) };
    let mut cases = 0;
    for tp in 0..=20 {
        for fp in 0..=20 {
            for tn in 0..=20 {
                for fn_ in 0..=20 {
                    let cm = ConfusionMatrix { true_pos: tp, false_pos: fp, true_neg: tn, false_neg: fn_ };
                    cases += 1;
                    let total = tp + fp + tn + fn_;
                    let got = metrics(&cm);
                    if total == 0 {
                        ensure(got.is_err(), || "empty matrix accepted".into())?;
                        continue;
                    }
                    let m = got.map_err(|e| e.to_string())?;
                    let acc = Q::new((tp + tn) as u64, total as u64);
                    let (p, dp) = frac(tp, tp + fp);
                    let (r, dr) = frac(tp, tp + fn_);
                    let (fpr, dfpr) = frac(fp, fp + tn);
                    let (fnr, dfnr) = frac(fn_, fn_ + tp);
                    let (f1, df1) = if p + r == Q::from_integer(0) {
                        (Q::from_integer(0), true)
                    } else {
                        (Q::from_integer(2) * p * r / (p + r), false)
                    };
                    let checks = [
                        ("accuracy", m.accuracy, to_f(acc)),
                        ("precision", m.precision, to_f(p)),
                        ("recall", m.recall, to_f(r)),
                        ("fpr", m.fpr, to_f(fpr)),
                        ("fnr", m.fnr, to_f(fnr)),
                        ("f1", m.f1, to_f(f1)),
                    ];
                    for (name, a, b) in checks {
                        ensure(a == b, || format!("{cm:?} {name}: {a} vs exact {b}"))?;
                    }
                    let d = m.degenerate;
                    ensure((d.precision, d.recall, d.fpr, d.fnr, d.f1) == (dp, dr, dfpr, dfnr, df1), || {
                        format!("{cm:?}: flags {d:?}")
                    })?;
                }
            }
        }
    }
    Ok(format!("{cases} matrices, all ratios and flags exact"))
}

// ---------------------------------------------------------------- 4

fn criterion_4() -> Check {
    let mut rng = seed::rng(4);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for case in 0..20 {
        let input = rng.random_range(2..=8);
        let depth = rng.random_range(1..=2);
        let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(2..=8)).collect();
        let mut net = mlp::Mlp::random(input, &hidden, &mut rng);
        let params: Vec<f64> = (0..net.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
        net.set_params(&params);
        let batch = rng.random_range(1..=16);
        let x: Vec<Vec<f64>> =
            (0..batch).map(|_| (0..input).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let y: Vec<f64> = (0..batch).map(|_| f64::from(rng.random_range(0..2u8))).collect();
        let rows: Vec<usize> = (0..batch).collect();
        let (_, grad) = net.loss_and_gradient(&x, &y, &rows);
        for k in 0..params.len() {
            let mut p = params.clone();
            p[k] += h;
            net.set_params(&p);
            let up = net.loss(&x, &y, &rows);
            p[k] -= 2.0 * h;
            net.set_params(&p);
            let down = net.loss(&x, &y, &rows);
            let numeric = (up - down) / (2.0 * h);
            // tiny gradients are compared against a 1e-6 floor instead of their own scale
            let e = rel_err(grad[k], numeric, 1e-6);
            worst = worst.max(e);
            checked += 1;
            ensure(e <= 1e-4, || format!("case {case} param {k}: analytic {} vs numeric {numeric}", grad[k]))?;
        }
        net.set_params(&params);
    }
    Ok(format!("20 networks, {checked} parameters, worst relative error {worst:.2e} (limit 1e-4)"))
}

// ---------------------------------------------------------------- 5

/// Exhaustive second-order stump search. Returns (gain, feature, threshold).
fn stump_oracle(x: &[Vec<f64>], g: &[f64], h: &[f64], min_leaf: usize, lambda: f64) -> Vec<(f64, usize, f64)> {
    let term = |gs: f64, hs: f64| gs * gs / (hs + lambda);
    let (gt, ht) = (g.iter().sum::<f64>(), h.iter().sum::<f64>());
    let mut out = Vec::new();
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = (0..x.len()).filter(|&i| x[i][f] < thr).collect();
            if left.len() < min_leaf || x.len() - left.len() < min_leaf {
                continue;
            }
            let gl: f64 = left.iter().map(|&i| g[i]).sum();
            let hl: f64 = left.iter().map(|&i| h[i]).sum();
            let gain = 0.5 * (term(gl, hl) + term(gt - gl, ht - hl) - term(gt, ht));
            out.push((gain, f, thr));
        }
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

fn criterion_5() -> Check {
    let mut rng = seed::rng(5);
    let cfg = gbt::GbtConfig { trees: 1, max_depth: 1, ..Default::default() };
    for case in 0..20 {
        let n = rng.random_range(20..=200);
        let d = rng.random_range(1..=5);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| {
                let z: f64 = r.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-1.0..1.0);
                f64::from(u8::from(z > 0.0))
            })
            .collect();
        if y.iter().all(|&v| v == y[0]) {
            return Err(format!("case {case}: generated a single class"));
        }
        let (model, _) = gbt::train(&x, &y, &cfg, Execution::Parallel).map_err(|e| e.to_string())?;
        let pos = y.iter().sum::<f64>() / n as f64;
        let p = pos; // sigmoid(log-odds of the positive rate) is the rate itself
        let g: Vec<f64> = y.iter().map(|t| p - t).collect();
        let h = vec![p * (1.0 - p); n];
        let ranked = stump_oracle(&x, &g, &h, cfg.min_samples_leaf, cfg.lambda);
        let root = model.trees[0].root_split();
        match (ranked.first(), root) {
            (None, None) => continue,
            (Some(best), None) if best.0 <= 0.0 => continue,
            (Some(best), Some((f, thr))) => {
                let tol = 1e-9 * best.0.abs().max(1e-12);
                let unique = ranked.get(1).is_none_or(|s| best.0 - s.0 > tol);
                if unique {
                    ensure(f == best.1 && (thr - best.2).abs() <= 1e-12 * best.2.abs().max(1.0), || {
                        format!(
                            "case {case}: chose ({f}, {thr}), exhaustive best ({}, {}) gain {}",
                            best.1, best.2, best.0
                        )
                    })?;
                } else {
                    let chosen = ranked.iter().find(|c| c.1 == f && (c.2 - thr).abs() <= 1e-12 * thr.abs().max(1.0));
                    ensure(chosen.is_some_and(|c| best.0 - c.0 <= tol), || {
                        format!("case {case}: tied split not optimal")
                    })?;
                }
            }
            (best, root) => return Err(format!("case {case}: oracle {best:?}, model root {root:?}")),
        }
    }
    Ok("20 datasets, selected stump equals exhaustive best".into())
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Check {
    let mut rng = seed::rng(6);
    let cfg = svc::SvcConfig::default();
    let tol = 1e-2;
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let n = rng.random_range(20..=80);
        let d = rng.random_range(2..=5);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let mut x = Vec::new();
        let mut t = Vec::new();
        for i in 0..n {
            let c = if i % 2 == 0 { -2.5 } else { 2.5 };
            x.push((0..d).map(|_| c + noise.sample(&mut rng)).collect::<Vec<f64>>());
            t.push((i % 2) as f64);
        }
        let (model, log) = svc::train(&x, &t, &cfg, Execution::Parallel).map_err(|e| e.to_string())?;
        ensure(log.converged, || format!("case {case}: did not converge"))?;
        for &a in &model.alphas {
            ensure(a >= 0.0 && a <= cfg.c, || format!("case {case}: alpha {a} outside [0, {}]", cfg.c))?;
        }
        let balance: f64 = model.alphas.iter().zip(&model.signs).map(|(a, s)| a * s).sum();
        ensure(balance.abs() < 1e-9, || format!("case {case}: sum alpha*y = {balance}"))?;
        for (row, &target) in x.iter().zip(&t) {
            let yi = if target > 0.5 { 1.0 } else { -1.0 };
            let m = yi * model.decision(row);
            let alpha = model.support_vectors.iter().position(|sv| sv == row).map_or(0.0, |k| model.alphas[k]);
            let violation = if alpha <= 0.0 {
                (1.0 - m).max(0.0)
            } else if alpha >= cfg.c {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            };
            worst = worst.max(violation);
            ensure(violation <= tol, || format!("case {case}: margin {m} with alpha {alpha}"))?;
        }
    }
    let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = [Label::Authentic, Label::Authentic, Label::Imposter, Label::Imposter];
    let model = classifiers::train(Variant::Svc, &x, &y, &TrainConfig::default(), 0, Execution::Sequential)
        .map_err(|e| e.to_string())?;
    let hits = x.iter().zip(&y).filter(|(r, l)| model.classify(r, 0.5).ok() == Some(**l)).count();
    ensure(hits == 4, || format!("XOR training accuracy {hits}/4"))?;
    Ok(format!("20 separable sets, worst margin violation {worst:.2e} (limit 1e-2); XOR 4/4"))
}

// ---------------------------------------------------------------- 7, 8, 9

fn synth_config(set: touchauth::synth::ProfileSet, n_events: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(InputSpec::Synth { profiles: ProfileSource::Inline(set), n_events });
    cfg.seed = 2024;
    cfg
}

fn model_means(rows: &[ReportRow]) -> Vec<(String, [f64; 3])> {
    let report = aggregate_report(rows, GroupBy::Model);
    report.groups.iter().map(|g| (g.model.clone(), [g.mean[0], g.mean[3], g.mean[2]])).collect()
}

fn criterion_7() -> Check {
    let out =
        run_pipeline(&synth_config(separable_profiles(8, 7), 3000), Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(out.report.rows.len() == 24, || format!("{} report rows, expected 24", out.report.rows.len()))?;
    let mut parts = Vec::new();
    for (model, [acc, fpr, fnr]) in model_means(&out.report.rows) {
        parts.push(format!("{model} acc {acc:.2} fpr {fpr:.2} fnr {fnr:.2}"));
        ensure(acc >= 90.0 && fpr <= 10.0 && fnr <= 10.0, || {
            format!("{model}: acc {acc:.2}, fpr {fpr:.2}, fnr {fnr:.2}")
        })?;
    }
    Ok(parts.join("; "))
}

fn criterion_8() -> Check {
    let out =
        run_pipeline(&synth_config(identical_profiles(8, 8), 3000), Execution::Parallel).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (model, [acc, ..]) in model_means(&out.report.rows) {
        parts.push(format!("{model} acc {acc:.2}"));
        ok &= (43.0..=57.0).contains(&acc);
    }
    let summary = parts.join("; ");
    ensure(ok, || format!("outside [43, 57]: {summary}"))?;
    Ok(summary)
}

fn criterion_9() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = tmp.path().join("config.json");
    let cfg = synth_config(separable_profiles(8, 9), 1000);
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (k, exec) in [Execution::Parallel, Execution::Parallel, Execution::Sequential].into_iter().enumerate() {
        let cfg = PipelineConfig::load(&cfg_path).map_err(|e| e.to_string())?;
        let dir = tmp.path().join(format!("run{k}"));
        run_pipeline(&cfg, exec).and_then(|o| o.write(&dir)).map_err(|e| e.to_string())?;
        let read = |name| std::fs::read(dir.join(name)).map_err(|e| e.to_string());
        outputs.push((read(REPORT_FILE)?, read(MANIFEST_FILE)?));
    }
    ensure(outputs[0] == outputs[1], || "two parallel runs differ".into())?;
    ensure(outputs[0] == outputs[2], || "sequential run differs from parallel".into())?;
    Ok(format!(
        "report ({} bytes) and manifest ({} bytes) identical across 3 runs",
        outputs[0].0.len(),
        outputs[0].1.len()
    ))
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let name = "reference dataset reproduction";
    let Some(dir) = std::env::var_os("TOUCHAUTH_REFERENCE_DATA").map(PathBuf::from) else {
        println!("[SKIP] 10 {name}: TOUCHAUTH_REFERENCE_DATA not set (non-blocking)");
        return Outcome { status: Status::Skip, blocking: false };
    };
    let mut outcome = run(10, name, None, || {
        let mut cfg = PipelineConfig::new(InputSpec::Logs { paths: vec![dir] });
        cfg.seed = 2024;
        let out = run_pipeline(&cfg, Execution::Parallel).map_err(|e| e.to_string())?;
        let targets = [("NN", 90.04, 5.0), ("XGB", 86.61, 5.0), ("SVC", 78.65, 7.0)];
        let means = model_means(&out.report.rows);
        let mut parts = Vec::new();
        for (model, want, tol) in targets {
            let acc = means.iter().find(|(m, _)| m == model).map(|(_, v)| v[0]).ok_or(format!("no {model} rows"))?;
            parts.push(format!("{model} {acc:.2} (target {want} ± {tol})"));
            ensure((acc - want).abs() <= tol, || parts.join("; "))?;
        }
        Ok(parts.join("; "))
    });
    outcome.blocking = false;
    outcome
}

// ---------------------------------------------------------------- 11

fn criterion_11() -> Check {
    let published = [
        ("1", "Pubg", "NN", 90.1681, 94.5204, 5.8643, 2.5584),
        ("2", "Pubg", "NN", 87.6734, 93.1222, 1.65, 2.3626),
        ("3", "Pubg", "NN", 81.1878, 89.261, 7.8569, 4.5216),
        ("4", "Pubg", "NN", 81.4061, 89.4612, 6.9879, 3.8542),
        ("5", "Diep.io", "XGB", 90.9043, 94.9107, 4.1317, 3.2142),
        ("6", "Diep.io", "XGB", 87.3975, 92.9866, 1.5367, 2.3584),
        ("7", "Diep.io", "XGB", 91.3465, 95.1467, 2.9321, 4.1263),
        ("8", "Diep.io", "XGB", 88.9649, 93.8884, 10.1294, 6.3285),
    ];
    let rows: Vec<ReportRow> = published
        .iter()
        .map(|&(user, game, model, accuracy, f1, fnr, fpr)| ReportRow {
            user: user.into(),
            game: game.into(),
            model: model.into(),
            accuracy,
            f1,
            fnr,
            fpr,
        })
        .collect();
    let report = aggregate_report(&rows, GroupBy::ModelGame);
    // printed Avg rows: accuracy, F1, FNR, FPR
    let printed = [
        ("Diep.io", "XGB", [89.6533, 94.2331, 4.682475, 4.00685]),
        ("Pubg", "NN", [85.10885, 91.5912, 5.589775, 3.3242]),
    ];
    for (game, model, cells) in printed {
        let g = report
            .groups
            .iter()
            .find(|g| g.game == game && g.model == model)
            .ok_or(format!("no group {game}/{model}"))?;
        for (k, (got, want)) in g.mean.iter().zip(cells).enumerate() {
            ensure((got - want).abs() < 5e-5, || format!("{game}/{model} column {k}: {got} vs printed {want}"))?;
        }
    }
    Ok("all 8 Avg cells agree with the published table to 4 decimals (85.10885 PUBG/NN, 89.6533 Diep.io/XGB)".into())
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let outcomes = [
        run(1, "kinematics vs finite-difference oracle", Some(secs(10)), criterion_1),
        run(2, "aggregation vs two-pass reference", Some(secs(5)), criterion_2),
        run(3, "metrics vs exact rationals", Some(secs(10)), criterion_3),
        run(4, "MLP gradient check", Some(secs(30)), criterion_4),
        run(5, "GBT stump vs exhaustive split", Some(secs(30)), criterion_5),
        run(6, "SVC feasibility and XOR", None, criterion_6),
        run(7, "separable synthetic cohort", Some(secs(300)), criterion_7),
        run(8, "null-signal cohort at chance", None, criterion_8),
        run(9, "pipeline determinism", None, criterion_9),
        criterion_10(),
        run(11, "published Avg cells", Some(secs(1)), criterion_11),
    ];
    let failed = outcomes.iter().filter(|o| o.blocking && matches!(o.status, Status::Fail)).count();
    if failed > 0 {
        println!("acceptance: {failed} blocking criteria failed");
        ExitCode::FAILURE
    } else {
        println!("acceptance: all blocking criteria passed");
        ExitCode::SUCCESS
    }
}
