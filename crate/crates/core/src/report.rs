//! Knowledge groups, the review list and learner claims.
//!
//! Every answer falls in one of four groups by (correct, confident). Wrong
//! answers (groups 3 and 4) and correct-but-unsure answers (group 2) go on
//! the review list; groups 2 and 4 are highlighted as the ones a learner
//! would otherwise overlook.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gaze::AnswerRecord;
use crate::learn::Label;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum KnowledgeGroup {
    CorrectConfident = 1,
    CorrectUnconfident = 2,
    IncorrectUnconfident = 3,
    IncorrectConfident = 4,
}

impl KnowledgeGroup {
    pub const ALL: [KnowledgeGroup; 4] = [
        KnowledgeGroup::CorrectConfident,
        KnowledgeGroup::CorrectUnconfident,
        KnowledgeGroup::IncorrectUnconfident,
        KnowledgeGroup::IncorrectConfident,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// (correct, confident).
    pub fn parts(self) -> (bool, bool) {
        match self {
            KnowledgeGroup::CorrectConfident => (true, true),
            KnowledgeGroup::CorrectUnconfident => (true, false),
            KnowledgeGroup::IncorrectUnconfident => (false, false),
            KnowledgeGroup::IncorrectConfident => (false, true),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            KnowledgeGroup::CorrectConfident => "correct, confident",
            KnowledgeGroup::CorrectUnconfident => "correct, unsure",
            KnowledgeGroup::IncorrectUnconfident => "wrong, unsure",
            KnowledgeGroup::IncorrectConfident => "wrong, confident",
        }
    }

    fn review_rank(self) -> Option<u8> {
        match self {
            KnowledgeGroup::IncorrectConfident => Some(0),
            KnowledgeGroup::CorrectUnconfident => Some(1),
            KnowledgeGroup::IncorrectUnconfident => Some(2),
            KnowledgeGroup::CorrectConfident => None,
        }
    }

    pub fn is_highlighted(self) -> bool {
        matches!(self, KnowledgeGroup::CorrectUnconfident | KnowledgeGroup::IncorrectConfident)
    }
}

impl From<KnowledgeGroup> for u8 {
    fn from(g: KnowledgeGroup) -> u8 {
        g.number()
    }
}

impl TryFrom<u8> for KnowledgeGroup {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        KnowledgeGroup::ALL.get(usize::from(n).wrapping_sub(1)).copied().ok_or_else(|| format!("group must be 1..4, got {n}"))
    }
}

pub fn categorize(correct: bool, confident: bool) -> KnowledgeGroup {
    match (correct, confident) {
        (true, true) => KnowledgeGroup::CorrectConfident,
        (true, false) => KnowledgeGroup::CorrectUnconfident,
        (false, false) => KnowledgeGroup::IncorrectUnconfident,
        (false, true) => KnowledgeGroup::IncorrectConfident,
    }
}

/// An answer with the model's confidence estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedAnswer {
    pub answer: AnswerRecord,
    pub predicted_confident: bool,
    /// SVM decision value; positive leans confident.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewItem {
    #[serde(rename = "question")]
    pub question_id: String,
    pub group: KnowledgeGroup,
    pub highlighted: bool,
    #[serde(rename = "score")]
    pub decision_score: f64,
}

/// Review items for groups 4, 2 and 3 in that order, each by descending
/// |score|; ties keep input order. Group 1 is left out.
pub fn build_review_list(answers: &[EstimatedAnswer]) -> Vec<ReviewItem> {
    let mut items: Vec<(u8, ReviewItem)> = answers
        .iter()
        .filter_map(|a| {
            let group = categorize(a.answer.correct, a.predicted_confident);
            group.review_rank().map(|rank| {
                (
                    rank,
                    ReviewItem {
                        question_id: a.answer.question_id.clone(),
                        group,
                        highlighted: group.is_highlighted(),
                        decision_score: a.score,
                    },
                )
            })
        })
        .collect();
    items.sort_by(|(ra, a), (rb, b)| {
        ra.cmp(rb).then(b.decision_score.abs().total_cmp(&a.decision_score.abs()))
    });
    items.into_iter().map(|(_, item)| item).collect()
}

/// Headline model quality shown alongside the list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub confidence_ap: f64,
    pub unconfidence_ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub participant: Option<String>,
    pub answers: usize,
    /// Answer counts for groups 1..4.
    pub group_counts: [usize; 4],
    pub items: usize,
    pub highlighted: usize,
    pub evaluation: Option<EvalSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewReport {
    pub items: Vec<ReviewItem>,
    pub summary: ReportSummary,
}

pub fn render_report(
    participant: Option<&str>,
    answers: &[EstimatedAnswer],
    evaluation: Option<EvalSummary>,
) -> ReviewReport {
    let items = build_review_list(answers);
    let mut group_counts = [0; 4];
    for a in answers {
        group_counts[usize::from(categorize(a.answer.correct, a.predicted_confident).number()) - 1] += 1;
    }
    ReviewReport {
        summary: ReportSummary {
            participant: participant.map(String::from),
            answers: answers.len(),
            group_counts,
            items: items.len(),
            highlighted: items.iter().filter(|i| i.highlighted).count(),
            evaluation,
        },
        items,
    }
}

impl ReviewReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Review list\n\n");
        if let Some(p) = &self.summary.participant {
            let _ = writeln!(out, "Participant: {p}\n");
        }
        if let Some(e) = &self.summary.evaluation {
            let _ = writeln!(
                out,
                "Model AP: confidence {:.3}, unconfidence {:.3}\n",
                e.confidence_ap, e.unconfidence_ap
            );
        }
        if self.items.is_empty() {
            out.push_str("Nothing to review.\n");
            return out;
        }
        out.push_str("| question | group | check | score | claim |\n|---|---|---|---|---|\n");
        for item in &self.items {
            let _ = writeln!(
                out,
                "| {} | {} ({}) | {} | {:.3} | `gazeconf claim --question {}` |",
                item.question_id,
                item.group.number(),
                item.group.describe(),
                if item.highlighted { "**yes**" } else { "" },
                item.decision_score,
                item.question_id
            );
        }
        out
    }
}

/// A learner's correction of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub question_id: String,
    pub estimated: Label,
    pub corrected: Label,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Claim {
    pub fn new(question_id: impl Into<String>, estimated: Label, corrected: Label, timestamp: u64) -> Result<Self> {
        if estimated == corrected {
            return Err(Error::Validation("a claim must change the estimate".into()));
        }
        Ok(Self { question_id: question_id.into(), estimated, corrected, timestamp })
    }
}

/// Append-only JSONL log of claims against one session's questions.
#[derive(Debug)]
pub struct ClaimStore {
    path: PathBuf,
    known: HashSet<String>,
}

impl ClaimStore {
    pub fn open(path: impl Into<PathBuf>, known_questions: impl IntoIterator<Item = String>) -> Self {
        Self { path: path.into(), known: known_questions.into_iter().collect() }
    }

    pub fn record(&mut self, claim: &Claim) -> Result<()> {
        if claim.estimated == claim.corrected {
            return Err(Error::Validation("a claim must change the estimate".into()));
        }
        if !self.known.contains(&claim.question_id) {
            return Err(Error::NotFound(format!("question {}", claim.question_id)));
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut line = serde_json::to_string(claim)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        Ok(())
    }

    /// Every claim in log order; an absent log is empty.
    pub fn claims(&self) -> Result<Vec<Claim>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
        }
        Ok(out)
    }

    pub fn len(&self) -> Result<usize> {
        Ok(self.claims()?.len())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    pub fn export(&self, labels: &[(String, Label)]) -> Result<Vec<(String, Label)>> {
        Ok(apply_claims(labels, &self.claims()?))
    }
}

/// Labels with claims applied; for a question claimed more than once the
/// latest claim in log order wins.
pub fn apply_claims(labels: &[(String, Label)], claims: &[Claim]) -> Vec<(String, Label)> {
    labels
        .iter()
        .map(|(q, l)| {
            let label = claims.iter().rev().find(|c| &c.question_id == q).map_or(*l, |c| c.corrected);
            (q.clone(), label)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn answer(q: &str, correct: bool, confident: bool, score: f64) -> EstimatedAnswer {
        EstimatedAnswer {
            answer: AnswerRecord { question_id: q.into(), correct, reported_confidence: None, reading_time: 1.0 },
            predicted_confident: confident,
            score,
        }
    }

    #[test]
    fn categorize_table() {
        assert_eq!(categorize(true, true), KnowledgeGroup::CorrectConfident);
        assert_eq!(categorize(true, false), KnowledgeGroup::CorrectUnconfident);
        assert_eq!(categorize(false, false), KnowledgeGroup::IncorrectUnconfident);
        assert_eq!(categorize(false, true), KnowledgeGroup::IncorrectConfident);
        for g in KnowledgeGroup::ALL {
            let (c, k) = g.parts();
            assert_eq!(categorize(c, k), g);
            assert_eq!(KnowledgeGroup::try_from(g.number()).unwrap(), g);
        }
        assert!(KnowledgeGroup::try_from(0).is_err());
        assert!(KnowledgeGroup::try_from(5).is_err());
    }

    #[test]
    fn all_group_one_is_empty() {
        let answers: Vec<_> = (0..10).map(|i| answer(&format!("q{i}"), true, true, 1.0)).collect();
        assert!(build_review_list(&answers).is_empty());
        let r = render_report(None, &answers, None);
        assert!(r.to_markdown().contains("Nothing to review."));
        assert_eq!(ReviewReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn one_per_group() {
        let answers = vec![
            answer("a", true, true, 2.0),
            answer("b", true, false, -0.5),
            answer("c", false, false, -1.5),
            answer("d", false, true, 0.25),
        ];
        let items = build_review_list(&answers);
        let ids: Vec<&str> = items.iter().map(|i| i.question_id.as_str()).collect();
        assert_eq!(ids, ["d", "b", "c"]);
        assert_eq!(items.iter().filter(|i| i.highlighted).count(), 2);
        let report = render_report(Some("p1"), &answers, None);
        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(json["items"].as_array().unwrap().len(), 3);
        assert_eq!(json["items"][0]["group"], 4);
        assert_eq!(json["items"][0]["question"], "d");
        assert_eq!(report.summary.group_counts, [1, 1, 1, 1]);
    }

    #[test]
    fn within_group_by_magnitude() {
        let answers =
            vec![answer("a", false, false, -0.1), answer("b", false, false, -3.0), answer("c", false, false, 1.0)];
        let ids: Vec<String> = build_review_list(&answers).into_iter().map(|i| i.question_id).collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }

    #[test]
    fn claims_log_and_export() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ClaimStore::open(dir.path().join("claims.jsonl"), ["q1".to_string(), "q2".to_string()]);
        assert!(store.is_empty().unwrap());
        store.record(&Claim::new("q1", Label::Confident, Label::Unconfident, 10).unwrap()).unwrap();
        assert_eq!(store.len().unwrap(), 1);
        store.record(&Claim::new("q1", Label::Unconfident, Label::Confident, 20).unwrap()).unwrap();
        assert_eq!(store.len().unwrap(), 2);
        let unknown = Claim::new("q9", Label::Confident, Label::Unconfident, 30).unwrap();
        assert!(matches!(store.record(&unknown), Err(Error::NotFound(_))));
        assert!(Claim::new("q1", Label::Confident, Label::Confident, 1).is_err());

        let labels = vec![("q1".to_string(), Label::Unconfident), ("q2".to_string(), Label::Confident)];
        let exported = store.export(&labels).unwrap();
        assert_eq!(exported, vec![("q1".to_string(), Label::Confident), ("q2".to_string(), Label::Confident)]);
        assert_eq!(store.export(&exported).unwrap(), exported);
    }

    proptest! {
        #[test]
        fn review_rule(answers in prop::collection::vec((any::<bool>(), any::<bool>(), -5.0f64..5.0), 0..60)) {
            let answers: Vec<_> = answers
                .iter()
                .enumerate()
                .map(|(i, &(c, k, s))| answer(&format!("q{i}"), c, k, s))
                .collect();
            let items = build_review_list(&answers);
            for a in &answers {
                let g = categorize(a.answer.correct, a.predicted_confident);
                let n = items.iter().filter(|i| i.question_id == a.answer.question_id).count();
                prop_assert_eq!(n, usize::from(g != KnowledgeGroup::CorrectConfident));
            }
            for i in &items {
                prop_assert_eq!(i.highlighted, matches!(i.group.number(), 2 | 4));
            }
            let ranks: Vec<u8> = items.iter().map(|i| i.group.review_rank().unwrap()).collect();
            prop_assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
