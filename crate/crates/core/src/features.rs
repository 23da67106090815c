//! The 30 per-answer gaze features.
//!
//! | index | feature |
//! |-------|---------|
//! | f1–f2 | fixation count, ratio on choices |
//! | f3–f4 | fixation count, ratio on question |
//! | f5–f8 | sum, mean, max, min of fixation durations on choices (ms) |
//! | f9–f12 | same on question |
//! | f13–f14 | population variance of fixation centroid x, y |
//! | f15–f16 | sum, mean saccade length (px) |
//! | f17–f20 | saccade count: all, within question, between choices, question↔choices |
//! | f21–f24 | sum, mean, max, min saccade duration (ms) |
//! | f25–f28 | sum, mean, max, min saccade speed (px/ms) |
//! | f29 | reading time (s) |
//! | f30 | correctness (0/1) |
//!
//! Empty groups report 0 for sum, mean, max and min.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::aoi::{assign_fixation, AoiLabel, AoiMap, SaccadeCategory};
use crate::events::EventStream;
use crate::gaze::AnswerRecord;
use crate::{Error, Result};

pub const N_FEATURES: usize = 30;

/// Zero-based index of f29.
pub const READING_TIME: usize = 28;

pub const DESCRIPTIONS: [&str; N_FEATURES] = [
    "fixation count on choices",
    "fixation ratio on choices",
    "fixation count on question",
    "fixation ratio on question",
    "sum of fixation durations on choices",
    "mean fixation duration on choices",
    "max fixation duration on choices",
    "min fixation duration on choices",
    "sum of fixation durations on question",
    "mean fixation duration on question",
    "max fixation duration on question",
    "min fixation duration on question",
    "variance of fixation x",
    "variance of fixation y",
    "sum of saccade lengths",
    "mean saccade length",
    "saccade count",
    "saccade count within question",
    "saccade count between choices",
    "saccade count between question and choices",
    "sum of saccade durations",
    "mean saccade duration",
    "max saccade duration",
    "min saccade duration",
    "sum of saccade speeds",
    "mean saccade speed",
    "max saccade speed",
    "min saccade speed",
    "reading time",
    "correctness",
];

/// `f1`..`f30` for a zero-based index.
pub fn feature_name(index: usize) -> String {
    format!("f{}", index + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }

    /// Value of feature `fN` (one-based, as in the feature table).
    pub fn f(&self, number: usize) -> f64 {
        self.0[number - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn project(&self, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.0[i]).collect()
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Sum, mean, max, min with the all-zero convention for empty input.
fn stats(values: impl IntoIterator<Item = f64>) -> [f64; 4] {
    let mut n = 0usize;
    let (mut sum, mut max, mut min) = (0.0, f64::NEG_INFINITY, f64::INFINITY);
    for v in values {
        n += 1;
        sum += v;
        max = max.max(v);
        min = min.min(v);
    }
    if n == 0 {
        return [0.0; 4];
    }
    [sum, sum / n as f64, max, min]
}

/// Population variance computed on offsets from the first value, so a
/// constant shift that is exact in floating point leaves it bit-identical.
fn variance(values: &[f64]) -> f64 {
    let Some(&anchor) = values.first() else { return 0.0 };
    let n = values.len() as f64;
    let offsets: Vec<f64> = values.iter().map(|v| v - anchor).collect();
    let mean = offsets.iter().sum::<f64>() / n;
    offsets.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n
}

pub fn extract_features(events: &EventStream, aoi: &AoiMap, answer: &AnswerRecord) -> Result<FeatureVector> {
    if events.fixations.is_empty() {
        return Err(Error::InsufficientEvents(format!(
            "question {} has no fixations",
            answer.question_id
        )));
    }
    let labels: Vec<AoiLabel> = events.fixations.iter().map(|f| assign_fixation(f, aoi)).collect();
    let total = events.fixations.len() as f64;
    let durations_on = |want: fn(AoiLabel) -> bool| {
        events
            .fixations
            .iter()
            .zip(&labels)
            .filter(move |(_, l)| want(**l))
            .map(|(f, _)| f.duration as f64)
    };
    let on_choice = |l: AoiLabel| matches!(l, AoiLabel::Choice(_));
    let on_question = |l: AoiLabel| l == AoiLabel::Question;
    let n_choice = durations_on(on_choice).count() as f64;
    let n_question = durations_on(on_question).count() as f64;
    let choice_stats = stats(durations_on(on_choice));
    let question_stats = stats(durations_on(on_question));

    let xs: Vec<f64> = events.fixations.iter().map(|f| f.cx).collect();
    let ys: Vec<f64> = events.fixations.iter().map(|f| f.cy).collect();

    // Saccade endpoints are the bounding fixations' centroids, so their
    // labels are the fixation labels.
    let categories: Vec<SaccadeCategory> =
        labels.windows(2).map(|w| SaccadeCategory::from_labels(w[0], w[1])).collect();
    let count_of = |c: SaccadeCategory| categories.iter().filter(|&&k| k == c).count() as f64;
    let length = stats(events.saccades.iter().map(|s| s.length));
    let duration = stats(events.saccades.iter().map(|s| s.duration as f64));
    let speed = stats(events.saccades.iter().map(|s| s.speed));

    let mut v = [0.0; N_FEATURES];
    v[0] = n_choice;
    v[1] = n_choice / total;
    v[2] = n_question;
    v[3] = n_question / total;
    v[4..8].copy_from_slice(&choice_stats);
    v[8..12].copy_from_slice(&question_stats);
    v[12] = variance(&xs);
    v[13] = variance(&ys);
    v[14] = length[0];
    v[15] = length[1];
    v[16] = events.saccades.len() as f64;
    v[17] = count_of(SaccadeCategory::WithinQuestion);
    v[18] = count_of(SaccadeCategory::BetweenChoices);
    v[19] = count_of(SaccadeCategory::BetweenQuestionAndChoices);
    v[20..24].copy_from_slice(&duration);
    v[24..28].copy_from_slice(&speed);
    v[28] = answer.reading_time;
    v[29] = if answer.correct { 1.0 } else { 0.0 };
    Ok(FeatureVector(v))
}
