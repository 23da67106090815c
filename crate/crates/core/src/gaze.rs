//! Gaze samples, answered questions, sessions and the JSONL gaze-log format.
//!
//! A gaze log is a sequence of question blocks. Each block starts with a
//! header line
//!
//! ```text
//! {"participant": "p01", "question": "q1", "correct": true, "confidence": null}
//! ```
//!
//! followed by one line per tracker sample: `{"t": 0, "x": 812.5, "y": 301.0, "v": 1}`.
//! Blocks for several participants may be interleaved in one file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

/// Participant ids that mark shared or unregistered accounts.
const PLACEHOLDER_IDS: &[&str] = &["guest", "anonymous", "unknown", "none", "null"];

/// One tracker measurement. `x`/`y` are screen pixels and meaningless when
/// `valid` is false.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    /// Milliseconds since session start.
    pub t: u64,
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

impl GazeSample {
    pub fn new(t: u64, x: f64, y: f64) -> Self {
        Self { t, x, y, valid: true }
    }

    pub fn invalid(t: u64) -> Self {
        Self { t, x: 0.0, y: 0.0, valid: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_id: String,
    pub correct: bool,
    /// Self-reported confidence; absent for unlabeled answers.
    pub reported_confidence: Option<bool>,
    /// Gaze span of the question in seconds (last minus first timestamp).
    pub reading_time: f64,
}

/// Samples recorded while answering one question, plus the answer itself.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionRecord {
    pub samples: Vec<GazeSample>,
    pub answer: AnswerRecord,
}

impl QuestionRecord {
    /// Builds a record, validating the samples and deriving the reading time.
    pub fn new(
        question_id: impl Into<String>,
        correct: bool,
        reported_confidence: Option<bool>,
        samples: Vec<GazeSample>,
    ) -> Result<Self> {
        let question_id = question_id.into();
        if let Some(pos) = samples.windows(2).position(|w| w[1].t < w[0].t) {
            return Err(Error::Validation(format!(
                "question {question_id}: timestamp {} after {} at sample {}",
                samples[pos + 1].t,
                samples[pos].t,
                pos + 1
            )));
        }
        let reading_time = reading_time_secs(&samples);
        if reading_time <= 0.0 {
            return Err(Error::Validation(format!(
                "question {question_id}: gaze span must be positive"
            )));
        }
        Ok(Self {
            samples,
            answer: AnswerRecord { question_id, correct, reported_confidence, reading_time },
        })
    }
}

fn reading_time_secs(samples: &[GazeSample]) -> f64 {
    match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => (b.t - a.t) as f64 / 1000.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub participant_id: String,
    pub records: Vec<QuestionRecord>,
}

impl Session {
    pub fn new(participant_id: impl Into<String>, records: Vec<QuestionRecord>) -> Result<Self> {
        let participant_id = participant_id.into();
        validate_participant(&participant_id)?;
        Ok(Self { participant_id, records })
    }
}

/// Rejects empty and placeholder participant ids such as `guest`.
pub fn validate_participant(id: &str) -> Result<()> {
    let trimmed = id.trim();
    if trimmed.is_empty()
        || PLACEHOLDER_IDS.iter().any(|p| trimmed.eq_ignore_ascii_case(p))
    {
        return Err(Error::InvalidParticipant(id.to_string()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    participant: String,
    question: String,
    correct: bool,
    confidence: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    t: u64,
    x: f64,
    y: f64,
    v: u8,
}

struct Block {
    line: usize,
    header: HeaderLine,
    samples: Vec<GazeSample>,
}

fn parse_blocks<R: BufRead>(reader: R) -> Result<Vec<Block>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        let is_header = value.as_object().is_some_and(|o| o.contains_key("participant"));
        if is_header {
            let header: HeaderLine = serde_json::from_value(value)
                .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
            blocks.push(Block { line: lineno, header, samples: Vec::new() });
            continue;
        }
        let sample: SampleLine = serde_json::from_value(value)
            .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        if sample.v > 1 || !sample.x.is_finite() || !sample.y.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: "v must be 0 or 1 and coordinates finite".into(),
            });
        }
        let block = blocks.last_mut().ok_or_else(|| Error::Parse {
            line: lineno,
            message: "sample before any question header".into(),
        })?;
        if let Some(prev) = block.samples.last() {
            if sample.t < prev.t {
                return Err(Error::Validation(format!(
                    "line {lineno}: timestamp {} goes backwards (previous {})",
                    sample.t, prev.t
                )));
            }
        }
        block.samples.push(GazeSample {
            t: sample.t,
            x: sample.x,
            y: sample.y,
            valid: sample.v == 1,
        });
    }
    Ok(blocks)
}

/// Reads every session in a gaze log, grouped by participant in order of
/// first appearance.
pub fn read_sessions<R: BufRead>(reader: R) -> Result<Vec<Session>> {
    let mut sessions: Vec<Session> = Vec::new();
    for block in parse_blocks(reader)? {
        let Block { line, header, samples } = block;
        validate_participant(&header.participant)
            .map_err(|_| Error::InvalidParticipant(format!("{} (line {line})", header.participant)))?;
        let record = QuestionRecord::new(header.question, header.correct, header.confidence, samples)
            .map_err(|e| match e {
                Error::Validation(m) => Error::Validation(format!("block at line {line}: {m}")),
                other => other,
            })?;
        match sessions.iter_mut().find(|s| s.participant_id == header.participant) {
            Some(s) => s.records.push(record),
            None => sessions.push(Session { participant_id: header.participant, records: vec![record] }),
        }
    }
    Ok(sessions)
}

pub fn load_sessions(path: impl AsRef<Path>) -> Result<Vec<Session>> {
    read_sessions(BufReader::new(File::open(path)?))
}

/// Loads a log that holds exactly one participant.
pub fn load_session(path: impl AsRef<Path>) -> Result<Session> {
    let mut sessions = load_sessions(path)?;
    match sessions.len() {
        1 => Ok(sessions.remove(0)),
        0 => Err(Error::Validation("log contains no question blocks".into())),
        n => Err(Error::Validation(format!("expected one participant, found {n}"))),
    }
}

pub fn write_sessions<W: Write>(sessions: &[Session], mut out: W) -> Result<()> {
    for session in sessions {
        for record in &session.records {
            let header = HeaderLine {
                participant: session.participant_id.clone(),
                question: record.answer.question_id.clone(),
                correct: record.answer.correct,
                confidence: record.answer.reported_confidence,
            };
            serde_json::to_writer(&mut out, &header)?;
            out.write_all(b"\n")?;
            for s in &record.samples {
                let line = SampleLine { t: s.t, x: s.x, y: s.y, v: u8::from(s.valid) };
                serde_json::to_writer(&mut out, &line)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

pub fn save_sessions(sessions: &[Session], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_sessions(sessions, &mut out)?;
    out.flush()?;
    Ok(())
}
