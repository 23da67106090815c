//! Class balancing, standardization, RBF-SVM training and feature selection.

pub mod dataset;
pub mod kernel;
pub mod smo;
pub mod stepwise;

pub use dataset::{oversample, standardize_fit, stratified_folds, Dataset, Label, Row, Standardizer};
pub use kernel::rbf_kernel;
pub use smo::{solve_dual, svm_decision, svm_train, DualSolution, SvmModel, SvmParams};
pub use stepwise::{forward_stepwise, forward_stepwise_trace, Step};

use serde::{Deserialize, Serialize};

use crate::features::{N_FEATURES, READING_TIME};
use crate::seed;
use crate::Result;

/// Which features a model is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    All,
    #[default]
    Stepwise,
    /// f29 alone; the reading-time baseline.
    ReadingTimeOnly,
}

/// Resolves the feature set for `mode`, running stepwise selection on `d`
/// when requested.
pub fn choose_features(d: &Dataset, params: &SvmParams, mode: FeatureMode, seed: u64) -> Result<Vec<usize>> {
    match mode {
        FeatureMode::All => Ok((0..N_FEATURES).collect()),
        FeatureMode::ReadingTimeOnly => Ok(vec![READING_TIME]),
        FeatureMode::Stepwise => forward_stepwise(d, params, seed),
    }
}

/// Feature selection, oversampling and SVM training on one training set.
pub fn fit(d: &Dataset, params: &SvmParams, mode: FeatureMode, seed: u64) -> Result<SvmModel> {
    let features = choose_features(d, params, mode, seed::derive(seed, 1))?;
    let balanced = oversample(d, seed::derive(seed, 2))?;
    svm_train(&balanced, params, &features, seed::derive(seed, 3))
}
