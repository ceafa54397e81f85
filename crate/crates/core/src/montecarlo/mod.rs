//! Reproducible Monte Carlo estimation.

pub mod engine;
pub mod estimator;
pub mod rng;
pub mod sweep;

pub use engine::{
    estimate, estimate_powers, run_sweep, run_trial, EngineError, EngineOptions, PointEstimates, Simulator, SweepPoint,
    TrialError, TrialState, BLOCK_SIZE, MIN_TRIALS,
};
pub use estimator::{EstimatorKind, EstimatorResult, MeanAccumulator, Metric, MetricScope, NeumaierSum};
pub use rng::{trial_seed, trial_stream};
pub use sweep::{SweepError, SweepSpec, SweepVar};
