//! Synthetic gaze sessions with known confidence labels.
//!
//! Each question is rendered on a fixed 1920×1080 screen with the question
//! box on top and four answer boxes in a 2×2 grid below. A fixation sequence
//! starts on the question, moves by a simple Markov walk (stay on the
//! question, jump to a choice, compare choices, reread the question) and
//! ends on the chosen answer, where the gaze dwells until the drawn reading
//! time is used up. Fixations are rendered as 90 Hz samples with clipped
//! Gaussian jitter, joined by short linear saccades. Per-participant traits
//! add a constant gaze shift, a jitter scale and a tempo factor.
//!
//! Counts are Poisson with a log-normal rate, durations and reading times
//! log-normal. None of the numbers model real eyes; they only give the
//! pipeline a learnable, noisy signal.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aoi::{LayoutConfig, Rect};
use crate::gaze::{GazeSample, QuestionRecord, Session};
use crate::seed;
use crate::{Error, Result};

pub const SAMPLE_RATE_HZ: f64 = 90.0;

/// Coordinates are quantized to this step so integer gaze shifts are exact.
pub const COORD_STEP: f64 = 1.0 / 16.0;

/// Jitter is clipped to this many pixels per axis, keeping every rendered
/// fixation within a 50 px dispersion window.
pub const MAX_JITTER_PX: f64 = 20.0;

/// Consecutive fixation targets are at least this far apart.
pub const MIN_FIXATION_GAP_PX: f64 = 90.0;

const MIN_FIXATION_MS: f64 = 120.0;
const MAX_FIXATION_MS: f64 = 1500.0;
const EDGE_MARGIN_PX: f64 = 30.0;

/// The screen layout every synthetic question uses.
pub fn screen_layout() -> LayoutConfig {
    LayoutConfig {
        question: Rect::new(160.0, 80.0, 1600.0, 300.0),
        choices: vec![
            Rect::new(160.0, 460.0, 760.0, 220.0),
            Rect::new(1000.0, 460.0, 760.0, 220.0),
            Rect::new(160.0, 740.0, 760.0, 220.0),
            Rect::new(1000.0, 740.0, 760.0, 220.0),
        ],
    }
}

/// Behavior of one confidence class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassParams {
    /// Median of the log-normal Poisson rate for the fixation count.
    pub fixation_count_mean: f64,
    pub fixation_count_spread: f64,
    /// Median fixation duration (ms) and log-space spread.
    pub fixation_duration_ms: f64,
    pub fixation_duration_spread: f64,
    /// Probability that a fixation on a choice moves to another choice.
    pub between_choice_rate: f64,
    /// Probability that a fixation on a choice returns to the question.
    pub question_reread_rate: f64,
    /// Median reading time (s) and log-space spread. The gaze dwells on the
    /// chosen answer until this time is reached.
    pub reading_time_s: f64,
    pub reading_time_spread: f64,
    /// Probability of answering correctly.
    pub correct_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorProfile {
    /// Probability that an answer is confident.
    pub class_prior: f64,
    /// Participant gaze shifts are drawn uniformly in ±this many px.
    pub participant_shift_px: u32,
    /// Median jitter standard deviation (px) and its per-participant
    /// log-space spread.
    pub noise_px: f64,
    pub noise_spread: f64,
    /// Log-space spread of the per-participant tempo factor that scales
    /// durations and reading time.
    pub tempo_spread: f64,
    /// Probability that a single sample is invalid.
    pub dropout_rate: f64,
    /// Probability that a question contains a burst of invalid samples.
    pub burst_rate: f64,
    /// Only every n-th question carries a confidence label.
    pub label_every: usize,
    pub confident: ClassParams,
    pub unconfident: ClassParams,
}

impl Default for BehaviorProfile {
    fn default() -> Self {
        Self {
            class_prior: 0.5,
            participant_shift_px: 120,
            noise_px: 6.0,
            noise_spread: 0.3,
            tempo_spread: 0.15,
            dropout_rate: 0.02,
            burst_rate: 0.1,
            label_every: 1,
            confident: ClassParams {
                fixation_count_mean: 6.0,
                fixation_count_spread: 0.4,
                fixation_duration_ms: 215.0,
                fixation_duration_spread: 0.3,
                between_choice_rate: 0.25,
                question_reread_rate: 0.1,
                reading_time_s: 3.5,
                reading_time_spread: 0.45,
                correct_rate: 0.85,
            },
            unconfident: ClassParams {
                fixation_count_mean: 9.5,
                fixation_count_spread: 0.4,
                fixation_duration_ms: 250.0,
                fixation_duration_spread: 0.3,
                between_choice_rate: 0.5,
                question_reread_rate: 0.18,
                reading_time_s: 4.8,
                reading_time_spread: 0.45,
                correct_rate: 0.5,
            },
        }
    }
}

impl ClassParams {
    fn validate(&self, name: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::Validation(format!("{name}.{what}")));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let spread = |v: f64| (0.0..=3.0).contains(&v);
        let rate = |v: f64| (0.0..=1.0).contains(&v);
        if !positive(self.fixation_count_mean) || !spread(self.fixation_count_spread) {
            return bad("fixation_count must have a positive mean and spread in [0, 3]");
        }
        if !positive(self.fixation_duration_ms) || !spread(self.fixation_duration_spread) {
            return bad("fixation_duration must have a positive median and spread in [0, 3]");
        }
        if !positive(self.reading_time_s) || !spread(self.reading_time_spread) {
            return bad("reading_time must have a positive median and spread in [0, 3]");
        }
        if !rate(self.between_choice_rate) || !rate(self.question_reread_rate) || !rate(self.correct_rate) {
            return bad("rates must lie in [0, 1]");
        }
        if self.between_choice_rate + self.question_reread_rate > 1.0 {
            return bad("between_choice_rate + question_reread_rate must not exceed 1");
        }
        Ok(())
    }
}

impl BehaviorProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.class_prior > 0.0 && self.class_prior < 1.0) {
            return Err(Error::Validation("class_prior must lie in (0, 1)".into()));
        }
        if !(self.noise_px > 0.0 && self.noise_px.is_finite()) || !(0.0..=3.0).contains(&self.noise_spread) {
            return Err(Error::Validation("noise_px must be positive, noise_spread in [0, 3]".into()));
        }
        if !(0.0..=3.0).contains(&self.tempo_spread) {
            return Err(Error::Validation("tempo_spread must lie in [0, 3]".into()));
        }
        if !(0.0..0.5).contains(&self.dropout_rate) || !(0.0..=1.0).contains(&self.burst_rate) {
            return Err(Error::Validation("dropout_rate must lie in [0, 0.5), burst_rate in [0, 1]".into()));
        }
        if self.label_every == 0 {
            return Err(Error::Validation("label_every must be at least 1".into()));
        }
        self.confident.validate("confident")?;
        self.unconfident.validate("unconfident")
    }

    /// Parses a TOML profile; every field must be present.
    pub fn from_toml(text: &str) -> Result<Self> {
        let p: Self = toml::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    /// The same profile with every answer drawn from one class.
    pub fn single_class(&self, confident: bool) -> Self {
        let params = if confident { &self.confident } else { &self.unconfident };
        Self { confident: params.clone(), unconfident: params.clone(), ..self.clone() }
    }
}

/// Per-participant constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipantTraits {
    pub shift_x: i32,
    pub shift_y: i32,
    /// Jitter standard deviation (px).
    pub noise: f64,
    /// Multiplies durations and reading time.
    pub tempo: f64,
}

impl ParticipantTraits {
    pub fn draw(profile: &BehaviorProfile, rng: &mut ChaCha8Rng) -> Self {
        let s = profile.participant_shift_px as i32;
        let ln = |median: f64, spread: f64, rng: &mut ChaCha8Rng| {
            LogNormal::new(median.ln(), spread).expect("validated spread").sample(rng)
        };
        Self {
            shift_x: rng.random_range(-s..=s),
            shift_y: rng.random_range(-s..=s),
            noise: ln(profile.noise_px, profile.noise_spread, rng),
            tempo: ln(1.0, profile.tempo_spread, rng),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    Question,
    Choice(usize),
}

struct Planned {
    x: f64,
    y: f64,
    ms: f64,
}

fn quantize(v: f64) -> f64 {
    (v / COORD_STEP).round() * COORD_STEP
}

fn point_in(rect: &Rect, prev: Option<(f64, f64)>, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut draw = || {
        (
            rng.random_range(rect.x + EDGE_MARGIN_PX..rect.x + rect.w - EDGE_MARGIN_PX),
            rng.random_range(rect.y + EDGE_MARGIN_PX..rect.y + rect.h - EDGE_MARGIN_PX),
        )
    };
    let mut p = draw();
    for _ in 0..64 {
        match prev {
            Some((px, py)) if (p.0 - px).hypot(p.1 - py) < MIN_FIXATION_GAP_PX => p = draw(),
            _ => break,
        }
    }
    p
}

/// Draws the fixation plan for one answer: positions in unshifted screen
/// coordinates and durations in ms.
fn plan_fixations(params: &ClassParams, tempo: f64, answer_choice: usize, rng: &mut ChaCha8Rng) -> Vec<Planned> {
    let layout = screen_layout();
    let rate = LogNormal::new(params.fixation_count_mean.ln(), params.fixation_count_spread)
        .expect("validated")
        .sample(rng);
    let count = (Poisson::new(rate).expect("positive rate").sample(rng) as usize).clamp(3, 60);
    let duration = LogNormal::new(params.fixation_duration_ms.ln(), params.fixation_duration_spread).expect("validated");

    let mut targets = vec![Target::Question];
    for _ in 1..count - 1 {
        let next = match *targets.last().expect("non-empty") {
            Target::Question => {
                if rng.random_bool(0.5) {
                    Target::Question
                } else {
                    Target::Choice(rng.random_range(0..4))
                }
            }
            Target::Choice(c) => {
                let u: f64 = rng.random();
                if u < params.question_reread_rate {
                    Target::Question
                } else if u < params.question_reread_rate + params.between_choice_rate {
                    Target::Choice((c + rng.random_range(1..4)) % 4)
                } else {
                    Target::Choice(c)
                }
            }
        };
        targets.push(next);
    }
    targets.push(Target::Choice(answer_choice));

    let mut prev = None;
    targets
        .into_iter()
        .map(|t| {
            let rect = match t {
                Target::Question => &layout.question,
                Target::Choice(c) => &layout.choices[c],
            };
            let (x, y) = point_in(rect, prev, rng);
            prev = Some((x, y));
            let ms = (duration.sample(rng) * tempo).clamp(MIN_FIXATION_MS, MAX_FIXATION_MS);
            Planned { x, y, ms }
        })
        .collect()
}

fn saccade_ms(distance: f64) -> f64 {
    20.0 + 0.05 * distance
}

/// Renders one answer as samples starting at sample index `k0`. Returns the
/// samples and the next free sample index.
fn render(
    plan: &mut [Planned],
    reading_ms: f64,
    traits: &ParticipantTraits,
    profile: &BehaviorProfile,
    k0: u64,
    rng: &mut ChaCha8Rng,
) -> (Vec<GazeSample>, u64) {
    let period = 1000.0 / SAMPLE_RATE_HZ;
    let moving: f64 = plan.windows(2).map(|w| saccade_ms((w[1].x - w[0].x).hypot(w[1].y - w[0].y))).sum();
    let busy: f64 = plan.iter().map(|p| p.ms).sum::<f64>() + moving;
    if busy < reading_ms {
        plan.last_mut().expect("non-empty plan").ms += reading_ms - busy;
    }

    let jitter = Normal::new(0.0, traits.noise).expect("positive noise");
    let (sx, sy) = (f64::from(traits.shift_x), f64::from(traits.shift_y));
    let mut positions: Vec<(f64, f64)> = Vec::new();
    let mut emit = |x: f64, y: f64, rng: &mut ChaCha8Rng| {
        let jx = jitter.sample(rng).clamp(-MAX_JITTER_PX, MAX_JITTER_PX);
        let jy = jitter.sample(rng).clamp(-MAX_JITTER_PX, MAX_JITTER_PX);
        positions.push((quantize(x + jx) + sx, quantize(y + jy) + sy));
    };
    for (i, p) in plan.iter().enumerate() {
        if i > 0 {
            let from = &plan[i - 1];
            let dist = (p.x - from.x).hypot(p.y - from.y);
            let steps = ((saccade_ms(dist) / period).round() as usize).max(1);
            for j in 1..=steps {
                let a = j as f64 / (steps + 1) as f64;
                emit(from.x + a * (p.x - from.x), from.y + a * (p.y - from.y), rng);
            }
        }
        let n = ((p.ms / period).round() as usize).max(2);
        for _ in 0..n {
            emit(p.x, p.y, rng);
        }
    }

    let mut valid = vec![true; positions.len()];
    for v in valid.iter_mut() {
        if rng.random_bool(profile.dropout_rate) {
            *v = false;
        }
    }
    if rng.random_bool(profile.burst_rate) && positions.len() > 30 {
        let len = rng.random_range(6..=20);
        let start = rng.random_range(1..positions.len() - len - 1);
        valid[start..start + len].iter_mut().for_each(|v| *v = false);
    }
    // Keep both ends valid so the gaze span is the rendered span.
    valid[0] = true;
    *valid.last_mut().expect("non-empty") = true;

    let samples = positions
        .into_iter()
        .zip(valid)
        .enumerate()
        .map(|(i, ((x, y), ok))| {
            let t = ((k0 + i as u64) as f64 * period).round() as u64;
            if ok {
                GazeSample::new(t, x, y)
            } else {
                GazeSample::invalid(t)
            }
        })
        .collect::<Vec<_>>();
    let next = k0 + samples.len() as u64 + (SAMPLE_RATE_HZ as u64); // one second between questions
    (samples, next)
}

/// A session whose participant traits are drawn from `seed`.
pub fn generate_session(
    profile: &BehaviorProfile,
    participant_id: &str,
    n_questions: usize,
    seed: u64,
) -> Result<Session> {
    profile.validate()?;
    let traits = ParticipantTraits::draw(profile, &mut seed::rng(seed::derive(seed, 0)));
    generate_session_with(profile, participant_id, n_questions, seed, &traits)
}

/// A session with explicit participant traits. Two calls differing only in
/// the integer shift produce the same gaze moved by exactly that shift.
pub fn generate_session_with(
    profile: &BehaviorProfile,
    participant_id: &str,
    n_questions: usize,
    seed: u64,
    traits: &ParticipantTraits,
) -> Result<Session> {
    profile.validate()?;
    if n_questions == 0 {
        return Err(Error::Validation("n_questions must be at least 1".into()));
    }
    if !(traits.noise > 0.0 && traits.tempo > 0.0) {
        return Err(Error::Validation("participant noise and tempo must be positive".into()));
    }
    let mut rng = seed::rng(seed::derive(seed, 1));
    let mut k = 0u64;
    let mut records = Vec::with_capacity(n_questions);
    for q in 0..n_questions {
        let confident = rng.random_bool(profile.class_prior);
        let params = if confident { &profile.confident } else { &profile.unconfident };
        let correct = rng.random_bool(params.correct_rate);
        let answer_choice = rng.random_range(0..4);
        let reading_ms = LogNormal::new(params.reading_time_s.ln(), params.reading_time_spread)
            .expect("validated")
            .sample(&mut rng)
            * 1000.0
            * traits.tempo;
        let mut plan = plan_fixations(params, traits.tempo, answer_choice, &mut rng);
        let (samples, next) = render(&mut plan, reading_ms, traits, profile, k, &mut rng);
        k = next;
        let label = (q % profile.label_every == 0).then_some(confident);
        records.push(QuestionRecord::new(format!("q{:03}", q + 1), correct, label, samples)?);
    }
    Session::new(participant_id, records)
}

/// `n_participants` sessions with ids p01, p02, … and independent seeds
/// derived from `seed`.
pub fn generate_population(
    profile: &BehaviorProfile,
    n_participants: usize,
    n_questions: usize,
    seed: u64,
) -> Result<Vec<Session>> {
    if n_participants < 2 {
        return Err(Error::Validation("a population needs at least 2 participants".into()));
    }
    (0..n_participants)
        .into_par_iter()
        .map(|i| {
            let id = format!("p{:02}", i + 1);
            generate_session(profile, &id, n_questions, seed::derive(seed, seed::tag_str(&id)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{detect_events, DetectorParams};

    #[test]
    fn default_profile_round_trips_through_toml() {
        let p = BehaviorProfile::default();
        p.validate().unwrap();
        assert_eq!(BehaviorProfile::from_toml(&p.to_toml()).unwrap(), p);
    }

    #[test]
    fn invalid_profiles_rejected() {
        let mut p = BehaviorProfile::default();
        p.class_prior = 1.0;
        assert!(matches!(p.validate(), Err(Error::Validation(_))));
        let mut p = BehaviorProfile::default();
        p.confident.fixation_count_mean = 0.0;
        assert!(p.validate().is_err());
        let mut p = BehaviorProfile::default();
        p.unconfident.between_choice_rate = 0.9;
        p.unconfident.question_reread_rate = 0.2;
        assert!(p.validate().is_err());
        assert!(generate_session(&BehaviorProfile::default(), "p1", 0, 1).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let p = BehaviorProfile::default();
        let a = generate_session(&p, "p1", 5, 9).unwrap();
        assert_eq!(a, generate_session(&p, "p1", 5, 9).unwrap());
        assert_ne!(a, generate_session(&p, "p1", 5, 10).unwrap());
    }

    #[test]
    fn streams_yield_fixations() {
        let p = BehaviorProfile::default();
        let s = generate_session(&p, "p1", 40, 3).unwrap();
        for r in &s.records {
            let ev = detect_events(&r.samples, &DetectorParams::default()).unwrap();
            assert!(ev.fixations.len() >= 2, "{}", r.answer.question_id);
            assert!(r.samples.iter().all(|s| (s.x * 16.0).fract() == 0.0));
        }
    }

    #[test]
    fn confident_profile_has_fewer_fixations() {
        let p = BehaviorProfile::default();
        let mean_count = |confident: bool| {
            let s = generate_session(&p.single_class(confident), "p1", 1000, 5).unwrap();
            let total: usize = s
                .records
                .iter()
                .map(|r| detect_events(&r.samples, &DetectorParams::default()).unwrap().fixations.len())
                .sum();
            total as f64 / s.records.len() as f64
        };
        assert!(mean_count(true) < mean_count(false));
    }

    #[test]
    fn class_balance_follows_prior() {
        let mut p = BehaviorProfile::default();
        p.class_prior = 0.3;
        let s = generate_session(&p, "p1", 2000, 11).unwrap();
        let n = s.records.len() as f64;
        let conf = s.records.iter().filter(|r| r.answer.reported_confidence == Some(true)).count() as f64;
        let sigma = (n * 0.3 * 0.7).sqrt();
        assert!((conf - n * 0.3).abs() < 3.0 * sigma);
    }

    #[test]
    fn labels_every_nth() {
        let mut p = BehaviorProfile::default();
        p.label_every = 5;
        let s = generate_session(&p, "p1", 12, 2).unwrap();
        let labeled: Vec<bool> = s.records.iter().map(|r| r.answer.reported_confidence.is_some()).collect();
        assert_eq!(labeled.iter().filter(|&&l| l).count(), 3);
        assert!(labeled[0] && labeled[5] && labeled[10]);
    }

    #[test]
    fn population_ids_and_minimum() {
        let p = BehaviorProfile::default();
        let pop = generate_population(&p, 3, 2, 1).unwrap();
        let ids: Vec<&str> = pop.iter().map(|s| s.participant_id.as_str()).collect();
        assert_eq!(ids, ["p01", "p02", "p03"]);
        assert!(generate_population(&p, 1, 2, 1).is_err());
    }
}
