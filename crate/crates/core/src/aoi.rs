//! Areas of interest: one question stem and four answer choices.
//!
//! Rectangles are half-open, `[x, x + w) × [y, y + h)`, so a point on a
//! shared edge belongs to exactly one area.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::events::{snap, Fixation, Saccade, CENTROID_GRID};
use crate::{Error, Result};

/// Share of the fixation bounding box height given to the question stem.
pub const RELATIVE_QUESTION_SHARE: f64 = 0.34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && px < self.x + self.w && py >= self.y && py < self.y + self.h
    }

    fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.x + other.w
            && other.x < self.x + self.w
            && self.y < other.y + other.h
            && other.y < self.y + self.h
    }

    fn is_proper(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) && self.w > 0.0 && self.h > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AoiLabel {
    Question,
    Choice(u8),
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SaccadeCategory {
    WithinQuestion,
    BetweenChoices,
    BetweenQuestionAndChoices,
    Other,
}

impl SaccadeCategory {
    pub fn from_labels(from: AoiLabel, to: AoiLabel) -> Self {
        use AoiLabel::*;
        match (from, to) {
            (Question, Question) => Self::WithinQuestion,
            (Choice(a), Choice(b)) if a != b => Self::BetweenChoices,
            (Question, Choice(_)) | (Choice(_), Question) => Self::BetweenQuestionAndChoices,
            _ => Self::Other,
        }
    }
}

/// Validated set of five pairwise disjoint rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AoiMap {
    pub question: Rect,
    pub choices: [Rect; 4],
}

/// Layout file contents before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub question: Rect,
    pub choices: Vec<Rect>,
}

impl LayoutConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl AoiMap {
    pub fn new(question: Rect, choices: [Rect; 4]) -> Result<Self> {
        let map = Self { question, choices };
        let rects = map.rects();
        for (i, r) in rects.iter().enumerate() {
            if !r.is_proper() {
                return Err(Error::Validation(format!("AOI {i} must have positive area")));
            }
            for (j, other) in rects.iter().enumerate().skip(i + 1) {
                if r.overlaps(other) {
                    return Err(Error::Validation(format!("AOIs {i} and {j} overlap")));
                }
            }
        }
        Ok(map)
    }

    /// Question first, then choices 0..3.
    pub fn rects(&self) -> [Rect; 5] {
        let [a, b, c, d] = self.choices;
        [self.question, a, b, c, d]
    }

    pub fn label_point(&self, x: f64, y: f64) -> AoiLabel {
        if self.question.contains(x, y) {
            return AoiLabel::Question;
        }
        self.choices
            .iter()
            .position(|r| r.contains(x, y))
            .map_or(AoiLabel::Outside, |i| AoiLabel::Choice(i as u8))
    }

    pub fn to_layout(&self) -> LayoutConfig {
        LayoutConfig { question: self.question, choices: self.choices.to_vec() }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_layout())?)?;
        Ok(())
    }
}

/// AOIs taken verbatim from a layout description.
pub fn absolute_layout(config: &LayoutConfig) -> Result<AoiMap> {
    let choices: [Rect; 4] = config.choices.as_slice().try_into().map_err(|_| {
        Error::Validation(format!("layout needs 4 choices, found {}", config.choices.len()))
    })?;
    AoiMap::new(config.question, choices)
}

/// AOIs derived from the bounding box of fixation centroids: the top 34 %
/// is the question, the remaining 66 % a 2×2 grid of choices in reading
/// order. Offsets are snapped to the centroid grid and the far edges are
/// pushed out by one grid step so the extreme centroids stay inside.
pub fn relative_layout(fixations: &[Fixation]) -> Result<AoiMap> {
    if fixations.len() < 2 {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 2 fixations, found {}",
            fixations.len()
        )));
    }
    let (mut min_x, mut max_x, mut min_y, mut max_y) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for f in fixations {
        min_x = min_x.min(f.cx);
        max_x = max_x.max(f.cx);
        min_y = min_y.min(f.cy);
        max_y = max_y.max(f.cy);
    }
    let width = max_x - min_x;
    let height = max_y - min_y;
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::DegenerateGeometry("fixation bounding box has zero extent".into()));
    }
    let full_w = width + CENTROID_GRID;
    let full_h = height + CENTROID_GRID;
    let question_h = snap(RELATIVE_QUESTION_SHARE * height);
    let row_split = snap((RELATIVE_QUESTION_SHARE + (1.0 - RELATIVE_QUESTION_SHARE) / 2.0) * height);
    let col_split = snap(0.5 * width);
    if question_h <= 0.0 || row_split <= question_h || col_split <= 0.0 {
        return Err(Error::DegenerateGeometry("bounding box too small to split".into()));
    }
    let top_row = Rect::new(0.0, min_y + question_h, 0.0, row_split - question_h);
    let bottom_row = Rect::new(0.0, min_y + row_split, 0.0, full_h - row_split);
    let left = |row: Rect| Rect { x: min_x, w: col_split, ..row };
    let right = |row: Rect| Rect { x: min_x + col_split, w: full_w - col_split, ..row };
    AoiMap::new(
        Rect::new(min_x, min_y, full_w, question_h),
        [left(top_row), right(top_row), left(bottom_row), right(bottom_row)],
    )
    .map_err(|e| Error::DegenerateGeometry(e.to_string()))
}

pub fn assign_fixation(f: &Fixation, m: &AoiMap) -> AoiLabel {
    m.label_point(f.cx, f.cy)
}

pub fn classify_saccade(s: &Saccade, m: &AoiMap) -> SaccadeCategory {
    SaccadeCategory::from_labels(m.label_point(s.from_x, s.from_y), m.label_point(s.to_x, s.to_y))
}
