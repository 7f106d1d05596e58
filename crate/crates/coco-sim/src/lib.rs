//! Simulation designs, estimator roster and the Monte-Carlo benchmark
//! harness for the composite-loss estimators.

pub mod estimator;
pub mod mc;
pub mod metrics;
pub mod scenario;
pub mod seed;

pub use estimator::{
    ex1_concaves, ex1_estimators, ex2_concaves, ex2_estimators, ex3_concaves, ex3_estimators,
    lambda_grid, Estimator, EstimatorKind, LambdaRule,
};
pub use mc::{configure_threads_from_env, run_mc, AggregateRow, McOutput};
pub use metrics::{metrics, MetricsReport};
pub use scenario::{generate, Contamination, Example, ScenarioData, ScenarioSpec};
pub use seed::derive_seed;
