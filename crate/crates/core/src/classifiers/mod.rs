//! Decision rules: plain and two-sample weighted K-NN, the adaptive
//! signal-to-noise classifiers, Lepski's rule and the Bayes rule.

mod adaptive;
mod lepski;
mod plan;
mod weighted;

pub use adaptive::{
    adaptive_label, adaptive_predict, multisource_adaptive_label, multisource_adaptive_predict,
    signed_snr, snr_index, stopping_threshold, AdaptiveStep, AdaptiveTrace, MultiAdaptiveStep,
    MultiAdaptiveTrace,
};
pub use lepski::{lepski_predict, lepski_run, LepskiOutcome, LepskiWidth};
pub use plan::{conventional_k, effective_sample_size, multisource_plan, theorem1_plan};
pub use weighted::{
    knn_predict, multisource_weighted_estimate, multisource_weighted_predict,
    weighted_knn_estimate, weighted_knn_predict,
};

use crate::data::Label;
use crate::scalar::Scalar;

/// A model exposing the target regression function `η_Q(x) = P(Y=1 | X=x)`.
pub trait TargetRegression<T> {
    fn eta_q(&self, x: &[T]) -> T;
}

/// Bayes rule for the target: 0 iff `η_Q(x) ≤ 1/2`.
pub fn bayes_classify<T: Scalar, M: TargetRegression<T> + ?Sized>(model: &M, x: &[T]) -> Label {
    Label::from(model.eta_q(x) > T::half())
}
