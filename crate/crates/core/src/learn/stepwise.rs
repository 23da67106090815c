//! Forward stepwise feature selection.
//!
//! Starting from the empty set, each round tries every unused feature,
//! scores the enlarged set by stratified two-fold cross-validation, and keeps
//! the best candidate if it beats the current set. The first round always
//! adds a feature. Scores are the mean over both folds of the average of the
//! confidence and unconfidence 11-point APs; training folds are oversampled,
//! validation folds never are.

use rayon::prelude::*;

use super::dataset::{oversample, stratified_folds, Dataset, Label};
use super::smo::{svm_train, SvmParams};
use crate::eval::target_aps;
use crate::features::N_FEATURES;
use crate::seed;
use crate::{Error, Result};

/// One accepted step: the feature added and the set's score after adding it.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub feature: usize,
    pub score: f64,
}

/// Two-fold cross-validated score of an SVM on `features`.
pub fn cv_score(d: &Dataset, folds: &[Vec<usize>], params: &SvmParams, features: &[usize], seed: u64) -> Result<f64> {
    let mut total = 0.0;
    for (k, test_idx) in folds.iter().enumerate() {
        let train_idx: Vec<usize> =
            folds.iter().enumerate().filter(|(j, _)| *j != k).flat_map(|(_, f)| f.iter().copied()).collect();
        let train = oversample(&d.subset(&train_idx)?, seed::derive(seed, 2 * k as u64))?;
        let model = svm_train(&train, params, features, seed::derive(seed, 2 * k as u64 + 1))?;
        let test = d.subset(test_idx)?;
        let scores: Vec<f64> = test.rows().iter().map(|r| model.decision(&r.features)).collect();
        let labels: Vec<Label> = test.rows().iter().map(|r| r.label).collect();
        let (conf, unconf) = target_aps(&scores, &labels)?;
        total += (conf + unconf) / 2.0;
    }
    Ok(total / folds.len() as f64)
}

/// Runs the selection and returns the accepted steps in order.
pub fn forward_stepwise_trace(d: &Dataset, params: &SvmParams, seed: u64) -> Result<Vec<Step>> {
    d.require_both_classes()?;
    let (conf, unconf) = d.class_counts();
    if d.len() < 4 || conf < 2 || unconf < 2 {
        return Err(Error::ClassMissing(
            "stepwise selection needs at least 4 rows and 2 of each class".into(),
        ));
    }
    let folds = stratified_folds(d, 2, seed::derive(seed, 0xF01D));
    let eval_seed = seed::derive(seed, 0x5E1E);
    let mut selected: Vec<usize> = Vec::new();
    let mut steps: Vec<Step> = Vec::new();
    while selected.len() < N_FEATURES {
        let candidates: Vec<usize> = (0..N_FEATURES).filter(|f| !selected.contains(f)).collect();
        let scores: Vec<Result<f64>> = candidates
            .par_iter()
            .map(|&f| {
                let mut set = selected.clone();
                set.push(f);
                cv_score(d, &folds, params, &set, eval_seed)
            })
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for (&f, score) in candidates.iter().zip(scores) {
            let score = score?;
            // strict comparison keeps the lowest index on ties
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((f, score));
            }
        }
        let (feature, score) = best.expect("at least one candidate");
        if steps.last().is_some_and(|last| score <= last.score) {
            break;
        }
        selected.push(feature);
        steps.push(Step { feature, score });
    }
    Ok(steps)
}

/// Selected feature indices, sorted.
pub fn forward_stepwise(d: &Dataset, params: &SvmParams, seed: u64) -> Result<Vec<usize>> {
    let mut features: Vec<usize> = forward_stepwise_trace(d, params, seed)?.iter().map(|s| s.feature).collect();
    features.sort_unstable();
    Ok(features)
}
