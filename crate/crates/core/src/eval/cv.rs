use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_std, target_aps, target_rankings, EvalReport, FoldReport, TargetMetrics};
use crate::gaze::Session;
use crate::learn::{fit, stratified_folds, Dataset, FeatureMode, Label, Row, SvmModel, SvmParams};
use crate::pipeline::{extract_dataset, EvalMode, PipelineConfig};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum FoldOutcome {
    Trained(SvmModel),
    Skipped(String),
}

/// A held-out test set with the model trained without it.
#[derive(Debug, Clone)]
pub struct Fold {
    pub name: String,
    pub n_train: usize,
    pub outcome: FoldOutcome,
    pub test: Vec<Row>,
}

/// Scores every trained fold's test rows, pools them for the 11-point
/// curves and records per-fold APs.
pub fn evaluate_both_targets(mode: &str, folds: &[Fold]) -> Result<EvalReport> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut reports = Vec::with_capacity(folds.len());
    let (mut conf_aps, mut unconf_aps) = (Vec::new(), Vec::new());
    for fold in folds {
        let mut report = FoldReport {
            name: fold.name.clone(),
            n_train: fold.n_train,
            n_test: fold.test.len(),
            selected_features: Vec::new(),
            confidence_ap: None,
            unconfidence_ap: None,
            skipped: None,
        };
        match &fold.outcome {
            FoldOutcome::Skipped(reason) => report.skipped = Some(reason.clone()),
            FoldOutcome::Trained(model) => {
                report.selected_features = model.selected_features.clone();
                let s: Vec<f64> = fold.test.iter().map(|r| model.decision(&r.features)).collect();
                let l: Vec<Label> = fold.test.iter().map(|r| r.label).collect();
                let has = |want: bool| l.iter().any(|x| x.is_confident() == want);
                let (conf, unconf) = target_rankings_partial(&s, &l, has(true), has(false));
                if let Some(ap) = conf {
                    conf_aps.push(ap);
                }
                if let Some(ap) = unconf {
                    unconf_aps.push(ap);
                }
                report.confidence_ap = conf;
                report.unconfidence_ap = unconf;
                scores.extend(s);
                labels.extend(l);
            }
        }
        reports.push(report);
    }
    if scores.is_empty() {
        return Err(Error::ClassMissing("every fold was skipped".into()));
    }
    let (conf, unconf) = target_rankings(&scores, &labels)?;
    Ok(EvalReport {
        mode: mode.to_string(),
        confidence: TargetMetrics::new(&conf, &conf_aps),
        unconfidence: TargetMetrics::new(&unconf, &unconf_aps),
        folds: reports,
    })
}

fn target_rankings_partial(scores: &[f64], labels: &[Label], any_conf: bool, any_unconf: bool) -> (Option<f64>, Option<f64>) {
    use super::pr::{average_precision_11pt, RankedPredictions};
    let conf = any_conf.then(|| {
        let r = RankedPredictions::new(scores.iter().zip(labels).map(|(&s, l)| (s, l.is_confident())).collect());
        average_precision_11pt(&r.expect("has positives"))
    });
    let unconf = any_unconf.then(|| {
        let r = RankedPredictions::new(scores.iter().zip(labels).map(|(&s, l)| (-s, !l.is_confident())).collect());
        average_precision_11pt(&r.expect("has positives"))
    });
    (conf, unconf)
}

/// Trains one model per (name, test indices) split on the complementary
/// rows. Folds whose training rows lack a class are skipped.
pub fn cross_validate(
    d: &Dataset,
    mode: &str,
    splits: &[(String, Vec<usize>)],
    params: &SvmParams,
    features: FeatureMode,
    seed: u64,
) -> Result<EvalReport> {
    let folds: Vec<Result<Fold>> = splits
        .par_iter()
        .enumerate()
        .map(|(k, (name, test_idx))| {
            let mut in_test = vec![false; d.len()];
            for &i in test_idx {
                in_test[i] = true;
            }
            let train_idx: Vec<usize> = (0..d.len()).filter(|&i| !in_test[i]).collect();
            let test: Vec<Row> = test_idx.iter().map(|&i| d.rows()[i].clone()).collect();
            let n_train = train_idx.len();
            let outcome = if train_idx.is_empty() {
                FoldOutcome::Skipped("empty training set".into())
            } else {
                let train = d.subset(&train_idx)?;
                match fit(&train, params, features, seed::derive(seed, k as u64)) {
                    Ok(model) => FoldOutcome::Trained(model),
                    Err(Error::ClassMissing(reason)) => FoldOutcome::Skipped(reason),
                    Err(e) => return Err(e),
                }
            };
            Ok(Fold { name: name.clone(), n_train, outcome, test })
        })
        .collect();
    let folds = folds.into_iter().collect::<Result<Vec<_>>>()?;
    evaluate_both_targets(mode, &folds)
}

/// Leave-one-participant-out: one fold per participant.
pub fn lopo_cv_dataset(d: &Dataset, params: &SvmParams, features: FeatureMode, seed: u64) -> Result<EvalReport> {
    let participants = d.participants();
    if participants.len() < 2 {
        return Err(Error::InsufficientParticipants(participants.len()));
    }
    let splits: Vec<(String, Vec<usize>)> = participants
        .into_iter()
        .map(|p| {
            let idx = (0..d.len()).filter(|&i| d.rows()[i].participant == p).collect();
            (p, idx)
        })
        .collect();
    cross_validate(d, "lopo", &splits, params, features, seed)
}

/// Stratified k-fold over all rows, ignoring participants.
pub fn pooled_cv(d: &Dataset, k: usize, params: &SvmParams, features: FeatureMode, seed: u64) -> Result<EvalReport> {
    if k < 2 || k > d.len() {
        return Err(Error::Range(format!("pooled folds must be in 2..={}, got {k}", d.len())));
    }
    let splits: Vec<(String, Vec<usize>)> = stratified_folds(d, k, seed::derive(seed, 0xF0))
        .into_iter()
        .enumerate()
        .map(|(i, idx)| (format!("fold{}", i + 1), idx))
        .collect();
    cross_validate(d, "pooled", &splits, params, features, seed)
}

/// Extracts features from `sessions` and runs leave-one-participant-out
/// cross-validation with the configured model settings.
pub fn lopo_cv(sessions: &[Session], config: &PipelineConfig) -> Result<EvalReport> {
    let extraction = extract_dataset(sessions, config)?;
    let d = extraction.labeled_dataset()?;
    let mut cfg = config.clone();
    cfg.eval = EvalMode::Lopo;
    lopo_cv_dataset(&d, &cfg.svm, cfg.features, cfg.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub confidence_mean: f64,
    pub confidence_std: f64,
    pub unconfidence_mean: f64,
    pub unconfidence_std: f64,
}

/// Draws `repeats` random training subsets of each size, trains on them and
/// scores the remaining rows. Subsets missing a class are redrawn.
pub fn learning_curve(
    d: &Dataset,
    sizes: &[usize],
    repeats: usize,
    params: &SvmParams,
    features: FeatureMode,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if repeats == 0 {
        return Err(Error::Range("repeats must be at least 1".into()));
    }
    if let Some(&bad) = sizes.iter().find(|&&s| s < 2 || s >= d.len()) {
        return Err(Error::Range(format!(
            "training size {bad} leaves no holdout (dataset has {} rows)",
            d.len()
        )));
    }
    let jobs: Vec<(usize, usize)> =
        sizes.iter().enumerate().flat_map(|(si, _)| (0..repeats).map(move |r| (si, r))).collect();
    let results: Vec<Result<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(si, r)| {
            let size = sizes[si];
            let job_seed = seed::derive(seed::derive(seed, size as u64), r as u64);
            let mut rng = seed::rng(job_seed);
            let mut idx: Vec<usize> = (0..d.len()).collect();
            for attempt in 0.. {
                idx.shuffle(&mut rng);
                let train = d.subset(&idx[..size])?;
                let (c, u) = train.class_counts();
                if c > 0 && u > 0 {
                    break;
                }
                if attempt >= 100 {
                    return Err(Error::ClassMissing(format!("no two-class subset of size {size}")));
                }
            }
            let train = d.subset(&idx[..size])?;
            let model = fit(&train, params, features, job_seed)?;
            let holdout = &idx[size..];
            let scores: Vec<f64> = holdout.iter().map(|&i| model.decision(&d.rows()[i].features)).collect();
            let labels: Vec<Label> = holdout.iter().map(|&i| d.rows()[i].label).collect();
            target_aps(&scores, &labels)
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(si, &size)| {
            let chunk = &results[si * repeats..(si + 1) * repeats];
            let conf: Vec<f64> = chunk.iter().map(|r| r.0).collect();
            let unconf: Vec<f64> = chunk.iter().map(|r| r.1).collect();
            let (cm, cs) = mean_std(&conf).expect("repeats >= 1");
            let (um, us) = mean_std(&unconf).expect("repeats >= 1");
            CurvePoint { size, confidence_mean: cm, confidence_std: cs, unconfidence_mean: um, unconfidence_std: us }
        })
        .collect())
}

/// Dispatches on the configured evaluation mode.
pub fn evaluate_dataset(d: &Dataset, config: &PipelineConfig) -> Result<EvalReport> {
    match config.eval {
        EvalMode::Lopo => lopo_cv_dataset(d, &config.svm, config.features, config.seed),
        EvalMode::Pooled => pooled_cv(d, config.pooled_folds, &config.svm, config.features, config.seed),
    }
}
