//! Precision–recall evaluation, cross-validation, learning curves and
//! feature–label correlations.

pub mod correlation;
pub mod cv;
pub mod pr;

pub use correlation::pearson_correlations;
pub use cv::{
    cross_validate, evaluate_both_targets, learning_curve, lopo_cv, lopo_cv_dataset, pooled_cv, CurvePoint,
    Fold, FoldOutcome,
};
pub use pr::{average_precision_11pt, pr_curve_11pt, RankedPredictions, RECALL_LEVELS};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::learn::Label;
use crate::Result;

/// Rankings for both detection targets: confidence uses the decision score
/// with confident answers as positives; unconfidence uses the negated score
/// with unconfident answers as positives.
pub fn target_rankings(scores: &[f64], labels: &[Label]) -> Result<(RankedPredictions, RankedPredictions)> {
    let conf = scores.iter().zip(labels).map(|(&s, l)| (s, l.is_confident())).collect();
    let unconf = scores.iter().zip(labels).map(|(&s, l)| (-s, !l.is_confident())).collect();
    Ok((RankedPredictions::new(conf)?, RankedPredictions::new(unconf)?))
}

/// (confidence AP, unconfidence AP).
pub fn target_aps(scores: &[f64], labels: &[Label]) -> Result<(f64, f64)> {
    let (c, u) = target_rankings(scores, labels)?;
    Ok((average_precision_11pt(&c), average_precision_11pt(&u)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    /// Interpolated precision at recall 0.0, 0.1, …, 1.0 over pooled
    /// predictions.
    pub precisions: [f64; RECALL_LEVELS],
    pub average_precision: f64,
    /// Mean and population std of per-fold APs, over folds whose test set
    /// contains a positive.
    pub fold_mean_ap: Option<f64>,
    pub fold_std_ap: Option<f64>,
}

impl TargetMetrics {
    fn new(ranking: &RankedPredictions, fold_aps: &[f64]) -> Self {
        let precisions = pr_curve_11pt(ranking);
        let (fold_mean_ap, fold_std_ap) = match mean_std(fold_aps) {
            Some((m, s)) => (Some(m), Some(s)),
            None => (None, None),
        };
        Self { average_precision: pr::mean_of_curve(&precisions), precisions, fold_mean_ap, fold_std_ap }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub selected_features: Vec<usize>,
    pub confidence_ap: Option<f64>,
    pub unconfidence_ap: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: String,
    pub confidence: TargetMetrics,
    pub unconfidence: TargetMetrics,
    pub folds: Vec<FoldReport>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `target,recall,precision` rows of both 11-point curves.
    pub fn pr_csv(&self) -> String {
        let mut out = String::from("target,recall,precision\n");
        for (name, m) in [("confidence", &self.confidence), ("unconfidence", &self.unconfidence)] {
            for (level, p) in m.precisions.iter().enumerate() {
                let _ = writeln!(out, "{name},{:.1},{p}", level as f64 / 10.0);
            }
        }
        out
    }

    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "evaluation: {} ({} folds, {} skipped)", self.mode, self.folds.len(),
            self.folds.iter().filter(|f| f.skipped.is_some()).count());
        let _ = writeln!(out, "{:<14} {:>8} {:>10} {:>10}", "target", "AP", "fold mean", "fold std");
        for (name, m) in [("confidence", &self.confidence), ("unconfidence", &self.unconfidence)] {
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "{:<14} {:>8.4} {:>10} {:>10}",
                name,
                m.average_precision,
                opt(m.fold_mean_ap),
                opt(m.fold_std_ap)
            );
        }
        out
    }
}

/// Mean and population standard deviation; `None` for empty input.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}
