//! 11-point interpolated precision and average precision.
//!
//! Items are ranked by descending score. Items sharing a score form one
//! block that is taken in full, which equals the worst-case ordering inside
//! the block. Interpolated precision at recall level ρ is the best
//! precision reached at any cutoff whose recall is at least ρ.

use crate::{Error, Result};

pub const RECALL_LEVELS: usize = 11;

/// Scores paired with relevance against one target class.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPredictions {
    items: Vec<(f64, bool)>,
}

impl RankedPredictions {
    pub fn new(items: Vec<(f64, bool)>) -> Result<Self> {
        if items.iter().any(|(s, _)| s.is_nan()) {
            return Err(Error::Validation("score is NaN".into()));
        }
        if !items.iter().any(|&(_, p)| p) {
            return Err(Error::NoPositives);
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(f64, bool)] {
        &self.items
    }

    pub fn positives(&self) -> usize {
        self.items.iter().filter(|&&(_, p)| p).count()
    }

    /// (true positives, retrieved) at the end of each equal-score block.
    fn cutoffs(&self) -> Vec<(usize, usize)> {
        let mut sorted = self.items.clone();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut out = Vec::new();
        let (mut tp, mut k) = (0, 0);
        for (idx, &(score, positive)) in sorted.iter().enumerate() {
            k += 1;
            tp += usize::from(positive);
            let block_ends = sorted.get(idx + 1).is_none_or(|next| next.0 != score);
            if block_ends {
                out.push((tp, k));
            }
        }
        out
    }
}

pub fn pr_curve_11pt(r: &RankedPredictions) -> [f64; RECALL_LEVELS] {
    let total_pos = r.positives();
    let cutoffs = r.cutoffs();
    let mut curve = [0.0; RECALL_LEVELS];
    for (level, slot) in curve.iter_mut().enumerate() {
        // recall >= level/10  <=>  10 * tp >= level * P
        *slot = cutoffs
            .iter()
            .filter(|&&(tp, _)| 10 * tp >= level * total_pos)
            .map(|&(tp, k)| tp as f64 / k as f64)
            .fold(0.0, f64::max);
    }
    curve
}

pub fn average_precision_11pt(r: &RankedPredictions) -> f64 {
    mean_of_curve(&pr_curve_11pt(r))
}

/// Mean of the curve. The sum is compensated so that rational curves give
/// the correctly rounded mean (e.g. exactly 28/33 for [1 x 6, 2/3 x 5]).
pub fn mean_of_curve(curve: &[f64; RECALL_LEVELS]) -> f64 {
    let (mut sum, mut carry) = (0.0_f64, 0.0_f64);
    for &v in curve {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    (sum + carry) / RECALL_LEVELS as f64
}
