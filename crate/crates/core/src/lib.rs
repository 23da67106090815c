//! Estimating answer confidence on multiple-choice questions from eye gaze.
//!
//! The pipeline runs raw gaze samples through dispersion-based fixation
//! detection ([`events`]), assigns fixations and saccades to question/choice
//! areas of interest ([`aoi`]), computes a 30-value feature vector per answer
//! ([`features`]), trains an RBF support vector machine with forward stepwise
//! feature selection ([`learn`]), evaluates it with 11-point average precision
//! ([`eval`]), and turns the estimates into a review list ([`report`]).
//! [`synth`] generates labeled sessions for testing the whole chain.

pub mod aoi;
pub mod cli;
pub mod error;
pub mod eval;
pub mod events;
pub mod features;
pub mod gaze;
pub mod learn;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
