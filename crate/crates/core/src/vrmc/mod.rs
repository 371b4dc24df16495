//! Control-variate (variance-reduced) Monte Carlo: covariance estimation,
//! optimal weights, the estimator itself and the error metrics.

mod estimator;
mod metrics;

pub use estimator::{
    check_pairing, estimate_covariances, fit_weights, optimal_weights, sample_mean, vrmc_estimate,
    ControlMean, Covariances, CvWeights, EstimatorResult, FittedWeights, RidgePolicy, SampleSet,
    WeightField, WeightMode,
};
pub use metrics::{l1_error, zeta, ZETA_FLOOR};
