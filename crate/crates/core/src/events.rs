//! Dispersion-threshold fixation detection and the validity filter.
//!
//! Invalid samples are dropped before segmentation, so tracker dropouts
//! inside a fixation do not split it. A window of valid samples is a
//! fixation when it spans at least `min_fixation_duration` and both the x
//! span and the y span stay within `dispersion_threshold`; the window then
//! grows until the next sample would break the dispersion limit.

use serde::{Deserialize, Serialize};

use crate::gaze::{GazeSample, Session};
use crate::{Error, Result};

/// Centroids are snapped to this grid relative to the fixation's first
/// sample. For inputs on a coarser binary grid this makes a constant shift
/// of all gaze move every centroid by exactly that shift.
pub const CENTROID_GRID: f64 = 1.0 / (1u64 << 20) as f64;

pub fn snap(v: f64) -> f64 {
    (v / CENTROID_GRID).round() * CENTROID_GRID
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub start: u64,
    pub end: u64,
    pub cx: f64,
    pub cy: f64,
    pub duration: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saccade {
    pub start: u64,
    pub end: u64,
    pub from_x: f64,
    pub from_y: f64,
    pub to_x: f64,
    pub to_y: f64,
    pub length: f64,
    pub duration: u64,
    /// Pixels per millisecond.
    pub speed: f64,
}

impl Saccade {
    /// The saccade bridging two consecutive fixations.
    pub fn between(from: &Fixation, to: &Fixation) -> Self {
        let length = (to.cx - from.cx).hypot(to.cy - from.cy);
        let duration = to.start - from.end;
        Self {
            start: from.end,
            end: to.start,
            from_x: from.cx,
            from_y: from.cy,
            to_x: to.cx,
            to_y: to.cy,
            length,
            duration,
            speed: length / duration as f64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub fixations: Vec<Fixation>,
    pub saccades: Vec<Saccade>,
}

impl EventStream {
    /// Builds the stream from temporally ordered fixations, inserting one
    /// saccade between each consecutive pair.
    pub fn from_fixations(fixations: Vec<Fixation>) -> Result<Self> {
        for pair in fixations.windows(2) {
            if pair[1].start <= pair[0].end {
                return Err(Error::Validation(format!(
                    "fixation starting at {} overlaps the previous one ending at {}",
                    pair[1].start, pair[0].end
                )));
            }
        }
        let saccades = fixations.windows(2).map(|w| Saccade::between(&w[0], &w[1])).collect();
        Ok(Self { fixations, saccades })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    #[serde(rename = "min_fixation_ms")]
    pub min_fixation_duration: u64,
    #[serde(rename = "dispersion_px")]
    pub dispersion_threshold: f64,
    pub min_valid_ratio: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self { min_fixation_duration: 100, dispersion_threshold: 50.0, min_valid_ratio: 0.8 }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_fixation_duration == 0 {
            return Err(Error::Validation("min_fixation_ms must be positive".into()));
        }
        if !(self.dispersion_threshold > 0.0 && self.dispersion_threshold.is_finite()) {
            return Err(Error::Validation("dispersion_px must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_valid_ratio) {
            return Err(Error::Validation("min_valid_ratio must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Parses `min_fixation_ms`, `dispersion_px` and `min_valid_ratio` from
    /// TOML; missing keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let params: Self = toml::from_str(text)?;
        params.validate()?;
        Ok(params)
    }
}

/// Running bounds of the current window.
#[derive(Clone, Copy)]
struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn of(s: &GazeSample) -> Self {
        Self { min_x: s.x, max_x: s.x, min_y: s.y, max_y: s.y }
    }

    fn with(self, s: &GazeSample) -> Self {
        Self {
            min_x: self.min_x.min(s.x),
            max_x: self.max_x.max(s.x),
            min_y: self.min_y.min(s.y),
            max_y: self.max_y.max(s.y),
        }
    }

    fn within(&self, limit: f64) -> bool {
        self.max_x - self.min_x <= limit && self.max_y - self.min_y <= limit
    }
}

fn centroid(window: &[GazeSample]) -> (f64, f64) {
    let anchor = window[0];
    let n = window.len() as f64;
    let (sx, sy) = window
        .iter()
        .fold((0.0, 0.0), |(sx, sy), s| (sx + (s.x - anchor.x), sy + (s.y - anchor.y)));
    (anchor.x + snap(sx / n), anchor.y + snap(sy / n))
}

/// Segments one question's samples into fixations and saccades.
pub fn detect_events(samples: &[GazeSample], params: &DetectorParams) -> Result<EventStream> {
    params.validate()?;
    let valid: Vec<GazeSample> = samples.iter().filter(|s| s.valid).copied().collect();
    if valid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = valid.len();
    let mut fixations = Vec::new();
    let mut i = 0;
    while i < n {
        let t0 = valid[i].t;
        let mut j = i;
        let mut bounds = Bounds::of(&valid[i]);
        while j + 1 < n && valid[j].t - t0 < params.min_fixation_duration {
            j += 1;
            bounds = bounds.with(&valid[j]);
        }
        if valid[j].t - t0 < params.min_fixation_duration {
            break;
        }
        if !bounds.within(params.dispersion_threshold) {
            i += 1;
            continue;
        }
        while j + 1 < n {
            let grown = bounds.with(&valid[j + 1]);
            if !grown.within(params.dispersion_threshold) {
                break;
            }
            bounds = grown;
            j += 1;
        }
        let (cx, cy) = centroid(&valid[i..=j]);
        let end = valid[j].t;
        fixations.push(Fixation { start: t0, end, cx, cy, duration: end - t0 });
        // Samples sharing the closing timestamp cannot open the next fixation.
        i = j + 1;
        while i < n && valid[i].t <= end {
            i += 1;
        }
    }
    EventStream::from_fixations(fixations)
}

/// Fraction of samples the tracker marked valid.
pub fn valid_ratio(samples: &[GazeSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let valid = samples.iter().filter(|s| s.valid).count();
    Ok(valid as f64 / samples.len() as f64)
}

/// Keeps records whose valid ratio reaches `params.min_valid_ratio`; with
/// `labeled_only`, also drops records without a confidence label.
pub fn filter_records(session: &Session, params: &DetectorParams, labeled_only: bool) -> Session {
    let records = session
        .records
        .iter()
        .filter(|r| !labeled_only || r.answer.reported_confidence.is_some())
        .filter(|r| valid_ratio(&r.samples).is_ok_and(|v| v >= params.min_valid_ratio))
        .cloned()
        .collect();
    Session { participant_id: session.participant_id.clone(), records }
}
