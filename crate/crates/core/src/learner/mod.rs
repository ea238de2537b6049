//! Classifier training and evaluation: RBF-kernel SVM trained by SMO,
//! ROC/AUC computation, and an l1-regularized linear model used for the
//! feature-selection comparison.

mod linear;
mod roc;
mod svm;

pub use linear::{selected_features, train_linear_l1, LinearL1Model};
pub use roc::{compute_roc, RocCurve, RocPoint};
pub use svm::{train_svm, SvmModel, SvmParams, TrainedSvm};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("training data must contain both classes")]
    DegenerateData,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Anything that produces a real-valued decision score for a feature vector.
pub trait DecisionModel {
    fn decision(&self, x: &[f64]) -> f64;
}
