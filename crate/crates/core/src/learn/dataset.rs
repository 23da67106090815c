use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureVector, N_FEATURES};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Confident,
    Unconfident,
}

impl Label {
    /// +1 for confident, −1 for unconfident.
    pub fn sign(self) -> f64 {
        match self {
            Label::Confident => 1.0,
            Label::Unconfident => -1.0,
        }
    }

    pub fn from_confident(confident: bool) -> Self {
        if confident {
            Label::Confident
        } else {
            Label::Unconfident
        }
    }

    pub fn is_confident(self) -> bool {
        self == Label::Confident
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub features: FeatureVector,
    pub label: Label,
    pub participant: String,
    pub question: String,
}

/// Labeled rows with finite features; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Row>,
}

impl Dataset {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Validation("dataset is empty".into()));
        }
        if let Some(r) = rows.iter().find(|r| !r.features.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite feature in {}/{}",
                r.participant, r.question
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Row> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (confident, unconfident) counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let confident = self.rows.iter().filter(|r| r.label.is_confident()).count();
        (confident, self.rows.len() - confident)
    }

    pub fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) => Err(Error::ClassMissing("no confident rows".into())),
            (_, 0) => Err(Error::ClassMissing("no unconfident rows".into())),
            _ => Ok(()),
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.rows[i].clone()).collect())
    }

    /// Participants in order of first appearance.
    pub fn participants(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.participant) {
                seen.push(r.participant.clone());
            }
        }
        seen
    }
}

/// Duplicates randomly chosen minority rows (with replacement) until both
/// classes have the same count. Originals keep their order; copies are
/// appended.
pub fn oversample(d: &Dataset, seed: u64) -> Result<Dataset> {
    d.require_both_classes()?;
    let (confident, unconfident) = d.class_counts();
    let minority = if confident < unconfident { Label::Confident } else { Label::Unconfident };
    let deficit = confident.abs_diff(unconfident);
    let pool: Vec<&Row> = d.rows.iter().filter(|r| r.label == minority).collect();
    let mut rng = seed::rng(seed);
    let mut rows = d.rows.clone();
    rows.extend((0..deficit).map(|_| pool[rng.random_range(0..pool.len())].clone()));
    Dataset::new(rows)
}

/// Splits row indices into `k` folds, dealing each class out round-robin
/// after a seeded shuffle so every fold sees both classes when possible.
pub fn stratified_folds(d: &Dataset, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seed::rng(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for label in [Label::Confident, Label::Unconfident] {
        let mut idx: Vec<usize> =
            (0..d.rows.len()).filter(|&i| d.rows[i].label == label).collect();
        idx.shuffle(&mut rng);
        let count = idx.len();
        for (n, i) in idx.into_iter().enumerate() {
            folds[(n + offset) % k].push(i);
        }
        offset += count;
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Per-feature z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Mean and population standard deviation of each selected column. A
/// constant column gets std 1.
pub fn standardize_fit(d: &Dataset, features: &[usize]) -> Standardizer {
    let n = d.len() as f64;
    let mut means = Vec::with_capacity(features.len());
    let mut stds = Vec::with_capacity(features.len());
    for &f in features {
        debug_assert!(f < N_FEATURES);
        let col = d.rows.iter().map(|r| r.features[f]);
        let mean = col.clone().sum::<f64>() / n;
        let constant = col.clone().all(|v| v == d.rows[0].features[f]);
        let std = if constant {
            1.0
        } else {
            (col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
        };
        means.push(mean);
        stds.push(std);
    }
    Standardizer { means, stds }
}
