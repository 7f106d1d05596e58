//! Monte-Carlo driver: repeated scenario draws, estimator fits and
//! metric aggregation.
//!
//! Runs are independent; each derives its own generator from
//! `(seed, run index)` and they execute in parallel without changing
//! any reported number.

use crate::estimator::Estimator;
use crate::metrics::{metrics, MetricsReport};
use crate::scenario::{generate, Contamination, ScenarioSpec};
use crate::seed::derive_seed;
use coco_core::{CocoError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fraction of failed fits (per estimator) tolerated before the whole
/// comparison is reported as failed.
pub const MAX_FAILURE_SHARE: f64 = 0.2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub estimator: String,
    pub scenario: String,
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McOutput {
    pub scenario: String,
    pub rows: Vec<AggregateRow>,
    /// `per_run[e][r]` is estimator `e`'s report on run `r`; `None`
    /// records a failed fit.
    pub per_run: Vec<Vec<Option<MetricsReport>>>,
    pub estimator_names: Vec<String>,
}

impl McOutput {
    /// Mean of one metric for one estimator.
    pub fn mean_of(&self, estimator: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.metric == metric)
            .map(|r| r.mean)
    }

    /// Aggregate table in CSV form (schema: estimator, scenario, metric,
    /// mean, sd, runs).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,scenario,metric,mean,sd,runs\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.estimator, row.scenario, row.metric, row.mean, row.sd, row.runs
            ));
        }
        out
    }
}

/// Configures the global worker pool from `COCO_THREADS` (no-op when a
/// pool already exists or the variable is unset/invalid).
pub fn configure_threads_from_env() {
    if let Ok(value) = std::env::var("COCO_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

/// Runs `runs` independent replicates of the scenario and aggregates
/// per-estimator metric means and standard deviations.
pub fn run_mc(
    scenario: &ScenarioSpec,
    estimators: &[Estimator],
    runs: usize,
) -> Result<McOutput> {
    if runs == 0 {
        return Err(CocoError::Validation("runs must be >= 1".into()));
    }
    if estimators.is_empty() {
        return Err(CocoError::Validation("estimator list is empty".into()));
    }
    scenario.validate()?;

    let label_floor = match scenario.contamination {
        Contamination::LabelFlip(v) => Some(v),
        _ => None,
    };

    let per_run_rows: Vec<Vec<Option<MetricsReport>>> = (0..runs)
        .into_par_iter()
        .map(|run| -> Result<Vec<Option<MetricsReport>>> {
            let run_spec = ScenarioSpec {
                seed: derive_seed(scenario.seed, run as u64),
                ..*scenario
            };
            let data = generate(&run_spec)?;
            let mut reports = Vec::with_capacity(estimators.len());
            for est in estimators {
                let report = est.fit_scenario(&data).and_then(|(beta, _)| {
                    metrics(
                        &beta,
                        &data.test,
                        Some(&data.signal_support),
                        label_floor,
                    )
                });
                reports.push(report.ok());
            }
            Ok(reports)
        })
        .collect::<Result<Vec<_>>>()?;

    // transpose to estimator-major
    let per_run: Vec<Vec<Option<MetricsReport>>> = (0..estimators.len())
        .map(|e| per_run_rows.iter().map(|row| row[e]).collect())
        .collect();

    for (e, est) in estimators.iter().enumerate() {
        let failures = per_run[e].iter().filter(|r| r.is_none()).count();
        if (failures as f64) > MAX_FAILURE_SHARE * runs as f64 {
            return Err(CocoError::Convergence {
                message: format!(
                    "estimator {} failed on {failures} of {runs} runs",
                    est.name
                ),
                trace: vec![],
            });
        }
    }

    let scenario_label = format!(
        "{}-{}",
        scenario.example.name(),
        scenario.contamination.label()
    );
    let mut rows = Vec::new();
    for (e, est) in estimators.iter().enumerate() {
        for metric in MetricsReport::NAMES {
            let values: Vec<f64> = per_run[e]
                .iter()
                .flatten()
                .filter_map(|r| r.get(metric))
                .collect();
            if values.is_empty() {
                continue;
            }
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (n - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            rows.push(AggregateRow {
                estimator: est.name.clone(),
                scenario: scenario_label.clone(),
                metric: metric.to_string(),
                mean,
                sd,
                runs: n,
            });
        }
    }

    Ok(McOutput {
        scenario: scenario_label,
        rows,
        per_run,
        estimator_names: estimators.iter().map(|e| e.name.clone()).collect(),
    })
}
