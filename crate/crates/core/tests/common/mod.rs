//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use gazeconf::aoi::{absolute_layout, AoiMap, LayoutConfig, Rect};
use gazeconf::events::{EventStream, Fixation};
use gazeconf::gaze::{AnswerRecord, GazeSample};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ts(k: u64) -> u64 {
    (k as f64 * 1000.0 / 90.0).round() as u64
}

// ---------------------------------------------------------------------------
// Dual SVM oracle: enumerate every at-bound / free pattern of the 8 alphas,
// solve the equality-constrained stationarity system on the free set and
// keep the best feasible objective.

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn dual_objective(alpha: &[f64], q: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * q[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Maximum of Σα − ½αᵀQα over 0 ≤ α ≤ C, yᵀα = 0, by exhaustive
/// enumeration of active sets.
pub fn exhaustive_dual_max(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64) -> f64 {
    let n = x.len();
    let q: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * rbf(&x[i], &x[j], gamma)).collect()).collect();
    let mut best = f64::NEG_INFINITY;
    let patterns = 3usize.pow(n as u32);
    for code in 0..patterns {
        let mut state = vec![0u8; n];
        let mut v = code;
        for s in state.iter_mut() {
            *s = (v % 3) as u8;
            v /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if free.is_empty() {
            let balance: f64 = alpha.iter().zip(y).map(|(a, yy)| a * yy).sum();
            if balance.abs() > 1e-12 {
                continue;
            }
        } else {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (k, &j) in free.iter().enumerate() {
                    a[r][k] = q[i][j];
                }
                a[r][m] = y[i];
                a[m][r] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|j| state[*j] != 2).map(|j| q[i][j] * alpha[j]).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|j| state[*j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
            let Some(sol) = solve_linear(a, rhs) else { continue };
            if sol[..m].iter().any(|&v| !(-1e-12..=c + 1e-12).contains(&v)) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        best = best.max(dual_objective(&alpha, &q));
    }
    best
}

/// Eight random 2-D points with both labels present.
pub fn toy_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    loop {
        let x: Vec<Vec<f64>> =
            (0..8).map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]).collect();
        let y: Vec<f64> = (0..8).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        if y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0) {
            return (x, y);
        }
    }
}

/// Largest KKT violation of (alpha, rho) in the decision-value form.
pub fn kkt_violation(x: &[Vec<f64>], y: &[f64], alpha: &[f64], rho: f64, c: f64, gamma: f64) -> f64 {
    let n = x.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| alpha[j] * y[j] * rbf(&x[j], &x[i], gamma)).sum::<f64>() - rho;
        let margin = y[i] * f;
        let v = if alpha[i] <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    let balance: f64 = alpha.iter().zip(y).map(|(a, b)| a * b).sum();
    worst.max(balance.abs())
}

// ---------------------------------------------------------------------------
// Planted event streams.

pub struct PlantedStream {
    pub samples: Vec<GazeSample>,
    /// Duration (ms) of each planted fixation: last minus first sample time.
    pub durations: Vec<u64>,
}

/// Fixations of 12–50 samples with ±10 px jitter, separated by 300–600 px
/// jumps whose 1–6 in-flight samples sit in the middle 40 % of the jump.
/// Invalid frames are injected strictly inside fixations and saccades.
pub fn planted_stream(rng: &mut ChaCha8Rng) -> PlantedStream {
    let count = rng.random_range(1..=8);
    let mut k = 0u64;
    let mut samples = Vec::new();
    let mut durations = Vec::new();
    let mut pos = (rng.random_range(300.0..1600.0), rng.random_range(300.0..800.0));
    for f in 0..count {
        if f > 0 {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let dist = rng.random_range(300.0..600.0);
            let next = (pos.0 + dist * angle.cos(), pos.1 + dist * angle.sin());
            let steps = rng.random_range(1..=6);
            for s in 0..steps {
                let a = 0.3 + 0.4 * (s as f64 + 0.5) / steps as f64;
                let valid = !rng.random_bool(0.2);
                samples.push(if valid {
                    GazeSample::new(ts(k), pos.0 + a * (next.0 - pos.0), pos.1 + a * (next.1 - pos.1))
                } else {
                    GazeSample::invalid(ts(k))
                });
                k += 1;
            }
            pos = next;
        }
        let n = rng.random_range(12..=50);
        let first = k;
        for s in 0..n {
            let interior = s > 0 && s + 1 < n;
            if interior && rng.random_bool(0.15) {
                samples.push(GazeSample::invalid(ts(k)));
            } else {
                let jx = rng.random_range(-10.0..=10.0);
                let jy = rng.random_range(-10.0..=10.0);
                samples.push(GazeSample::new(ts(k), pos.0 + jx, pos.1 + jy));
            }
            k += 1;
        }
        durations.push(ts(k - 1) - ts(first));
    }
    PlantedStream { samples, durations }
}

// ---------------------------------------------------------------------------
// The 3-fixation / 2-saccade feature fixture.
//
// Layout: question (0,0)-(1000,200); choices in a 2×2 grid of 500×100 boxes
// from y = 300. Fixations:
//   A  t 0–200     (100, 150)  question   200 ms
//   B  t 250–550   (100, 450)  choice 3   300 ms
//   C  t 600–1100  (700, 450)  choice 4   500 ms
// Saccades: A→B length 300, 50 ms; B→C length 600, 50 ms.

pub fn fixture_layout() -> AoiMap {
    absolute_layout(&LayoutConfig {
        question: Rect::new(0.0, 0.0, 1000.0, 200.0),
        choices: vec![
            Rect::new(0.0, 300.0, 500.0, 100.0),
            Rect::new(500.0, 300.0, 500.0, 100.0),
            Rect::new(0.0, 400.0, 500.0, 100.0),
            Rect::new(500.0, 400.0, 500.0, 100.0),
        ],
    })
    .unwrap()
}

pub fn fixture_events() -> EventStream {
    EventStream::from_fixations(vec![
        Fixation { start: 0, end: 200, cx: 100.0, cy: 150.0, duration: 200 },
        Fixation { start: 250, end: 550, cx: 100.0, cy: 450.0, duration: 300 },
        Fixation { start: 600, end: 1100, cx: 700.0, cy: 450.0, duration: 500 },
    ])
    .unwrap()
}

pub fn fixture_answer() -> AnswerRecord {
    AnswerRecord { question_id: "fx".into(), correct: true, reported_confidence: Some(false), reading_time: 1.1 }
}

/// Hand-computed values of f1..f30 for the fixture.
pub fn fixture_expected() -> [f64; 30] {
    [
        2.0,       // f1 fixations on choices (B, C)
        2.0 / 3.0, // f2
        1.0,       // f3 fixations on question (A)
        1.0 / 3.0, // f4
        800.0,     // f5 300 + 500
        400.0,     // f6
        500.0,     // f7
        300.0,     // f8
        200.0,     // f9
        200.0,     // f10
        200.0,     // f11
        200.0,     // f12
        80000.0,   // f13 x = 100, 100, 700: mean 300, (200² + 200² + 400²) / 3
        20000.0,   // f14 y = 150, 450, 450: mean 350, (200² + 100² + 100²) / 3
        900.0,     // f15 300 + 600
        450.0,     // f16
        2.0,       // f17
        0.0,       // f18 within question
        1.0,       // f19 between choices (B→C)
        1.0,       // f20 question↔choices (A→B)
        100.0,     // f21
        50.0,      // f22
        50.0,      // f23
        50.0,      // f24
        18.0,      // f25 6 + 12 px/ms
        9.0,       // f26
        12.0,      // f27
        6.0,       // f28
        1.1,       // f29
        1.0,       // f30
    ]
}
