//! Synthetic posterior-drift model, Monte-Carlo risk evaluation and the
//! replicated experiment harness.

mod experiments;
mod model;
mod rate;
mod risk;
mod sampling;

pub use experiments::{
    default_np_grid, default_pmax_grid, experiment_accuracy_vs_np, experiment_accuracy_vs_pmax,
    experiment_multisource, run_grid, ExperimentRecord, Figure, FigureConfig, GridPoint, Method,
    SimulationSettings,
};
pub use model::{make_drift_model, DriftModel};
pub use rate::{
    bootstrap_slope_ci, ols_slope, rate_exponent_check, RateCheckConfig, RateCheckReport,
    RatePoint, RateSweep,
};
pub use risk::{classification_accuracy, excess_risk_mc, AccuracyTruth, McEstimate};
pub use sampling::{sample_dataset, sample_multisource, sample_test_points};
