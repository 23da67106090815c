//! Configuration and the shared extraction stage: gaze log → events → AOIs →
//! feature rows, plus the feature CSV format.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aoi::{absolute_layout, relative_layout, AoiMap, LayoutConfig};
use crate::events::{detect_events, valid_ratio, DetectorParams, EventStream};
use crate::features::{extract_features, feature_name, FeatureVector, N_FEATURES};
use crate::gaze::{QuestionRecord, Session};
use crate::learn::{Dataset, FeatureMode, Label, Row, SvmParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AoiMode {
    Absolute,
    #[default]
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Pooled,
    #[default]
    Lopo,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoiConfig {
    pub mode: AoiMode,
    /// Layout JSON; required in absolute mode.
    pub layout: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub features: FeatureMode,
    pub eval: EvalMode,
    pub pooled_folds: usize,
    /// Drop answers without a confidence label before extraction.
    pub labeled_only: bool,
    pub detector: DetectorParams,
    pub aoi: AoiConfig,
    pub svm: SvmParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            features: FeatureMode::default(),
            eval: EvalMode::default(),
            pooled_folds: 10,
            labeled_only: true,
            detector: DetectorParams::default(),
            aoi: AoiConfig::default(),
            svm: SvmParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.svm.validate()?;
        if self.aoi.mode == AoiMode::Absolute && self.aoi.layout.is_none() {
            return Err(Error::Validation("absolute AOI mode needs a layout file".into()));
        }
        if self.pooled_folds < 2 {
            return Err(Error::Validation("pooled_folds must be at least 2".into()));
        }
        Ok(())
    }

    /// The fixed AOI map in absolute mode, `None` in relative mode.
    pub fn fixed_aoi(&self) -> Result<Option<AoiMap>> {
        match (self.aoi.mode, &self.aoi.layout) {
            (AoiMode::Relative, _) => Ok(None),
            (AoiMode::Absolute, Some(path)) => absolute_layout(&LayoutConfig::load(path)?).map(Some),
            (AoiMode::Absolute, None) => Err(Error::Validation("absolute AOI mode needs a layout file".into())),
        }
    }
}

/// One answer's features; `label` is `None` for unlabeled answers.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub participant: String,
    pub question: String,
    pub features: FeatureVector,
    pub label: Option<Label>,
}

/// A record that produced no feature row, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRecord {
    pub participant: String,
    pub question: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub rows: Vec<FeatureRow>,
    pub skipped: Vec<SkippedRecord>,
}

impl Extraction {
    /// Labeled rows as a training dataset.
    pub fn labeled_dataset(&self) -> Result<Dataset> {
        labeled_dataset(&self.rows)
    }
}

pub fn labeled_dataset(rows: &[FeatureRow]) -> Result<Dataset> {
    let rows: Vec<Row> = rows
        .iter()
        .filter_map(|r| {
            r.label.map(|label| Row {
                features: r.features,
                label,
                participant: r.participant.clone(),
                question: r.question.clone(),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Validation("no labeled rows".into()));
    }
    Dataset::new(rows)
}

/// Events and AOI map for one record.
pub fn record_events(
    record: &QuestionRecord,
    detector: &DetectorParams,
    fixed: Option<&AoiMap>,
) -> Result<(EventStream, AoiMap)> {
    let events = detect_events(&record.samples, detector)?;
    let aoi = match fixed {
        Some(m) => *m,
        None => relative_layout(&events.fixations)?,
    };
    Ok((events, aoi))
}

/// Filters, segments and featurizes every record. Records failing the
/// validity ratio, without fixations or with degenerate relative geometry
/// are listed in `skipped` instead of aborting the run.
pub fn extract_dataset(sessions: &[Session], config: &PipelineConfig) -> Result<Extraction> {
    config.validate()?;
    let fixed = config.fixed_aoi()?;
    let mut out = Extraction::default();
    for session in sessions {
        for record in &session.records {
            let skip = |reason: String| SkippedRecord {
                participant: session.participant_id.clone(),
                question: record.answer.question_id.clone(),
                reason,
            };
            if config.labeled_only && record.answer.reported_confidence.is_none() {
                continue;
            }
            let ratio = valid_ratio(&record.samples).unwrap_or(0.0);
            if ratio < config.detector.min_valid_ratio {
                out.skipped.push(skip(format!("valid ratio {ratio:.3} below threshold")));
                continue;
            }
            let result = record_events(record, &config.detector, fixed.as_ref())
                .and_then(|(events, aoi)| extract_features(&events, &aoi, &record.answer));
            match result {
                Ok(features) => out.rows.push(FeatureRow {
                    participant: session.participant_id.clone(),
                    question: record.answer.question_id.clone(),
                    features,
                    label: record.answer.reported_confidence.map(Label::from_confident),
                }),
                Err(e @ (Error::EmptyInput | Error::InsufficientEvents(_) | Error::DegenerateGeometry(_))) => {
                    out.skipped.push(skip(e.to_string()))
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Detected events of one record, as written by the detect command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEvents {
    pub participant: String,
    pub question: String,
    #[serde(flatten)]
    pub events: EventStream,
}

pub fn detect_all(sessions: &[Session], detector: &DetectorParams) -> Result<Vec<RecordEvents>> {
    detector.validate()?;
    let mut out = Vec::new();
    for s in sessions {
        for r in &s.records {
            let events = match detect_events(&r.samples, detector) {
                Ok(ev) => ev,
                Err(Error::EmptyInput) => EventStream::default(),
                Err(e) => return Err(e),
            };
            out.push(RecordEvents { participant: s.participant_id.clone(), question: r.answer.question_id.clone(), events });
        }
    }
    Ok(out)
}

/// Writes `f1..f30,label,participant,question`; label is 1 (confident),
/// 0 (unconfident) or empty.
pub fn write_feature_csv<W: Write>(rows: &[FeatureRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..N_FEATURES).map(feature_name).collect();
    header.extend(["label", "participant", "question"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = r.features.values().iter().map(|v| v.to_string()).collect();
        rec.push(match r.label {
            Some(Label::Confident) => "1".into(),
            Some(Label::Unconfident) => "0".into(),
            None => String::new(),
        });
        rec.push(r.participant.clone());
        rec.push(r.question.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(input);
    let expected = N_FEATURES + 3;
    let headers = r.headers()?.clone();
    if headers.len() != expected {
        return Err(Error::Parse { line: 1, message: format!("expected {expected} columns, found {}", headers.len()) });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != expected {
            return Err(Error::Parse { line, message: format!("expected {expected} columns, found {}", rec.len()) });
        }
        let mut v = [0.0; N_FEATURES];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k]
                .trim()
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("{}: not a number: {:?}", feature_name(k), &rec[k]) })?;
        }
        let label = match rec[N_FEATURES].trim() {
            "1" => Some(Label::Confident),
            "0" => Some(Label::Unconfident),
            "" => None,
            other => return Err(Error::Parse { line, message: format!("label must be 1, 0 or empty, got {other:?}") }),
        };
        rows.push(FeatureRow {
            features: FeatureVector(v),
            label,
            participant: rec[N_FEATURES + 1].to_string(),
            question: rec[N_FEATURES + 2].to_string(),
        });
    }
    Ok(rows)
}
