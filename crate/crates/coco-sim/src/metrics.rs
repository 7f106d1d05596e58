//! Prediction and selection metrics.

use coco_core::{Dataset, Result, TaskKind};
use serde::{Deserialize, Serialize};

/// Coefficient magnitudes above this count as selected.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Share of largest squared residuals dropped by the trimmed RMSE.
pub const TRIM_SHARE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsReport {
    pub rmse: Option<f64>,
    /// RMSE over the smallest 90% of squared residuals.
    pub trimmed_rmse: Option<f64>,
    /// Misclassification rate; includes the analytic contamination floor
    /// when the scenario flips labels (`floor + (1 - 2 floor) * clean`).
    pub misclass_error: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

impl MetricsReport {
    pub fn get(&self, metric: &str) -> Option<f64> {
        match metric {
            "rmse" => self.rmse,
            "trimmed_rmse" => self.trimmed_rmse,
            "misclass_error" => self.misclass_error,
            "sensitivity" => self.sensitivity,
            "specificity" => self.specificity,
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 5] = [
        "rmse",
        "trimmed_rmse",
        "misclass_error",
        "sensitivity",
        "specificity",
    ];
}

/// Evaluates coefficients on a test split.
///
/// `true_support` (zero-based predictor indices) switches on the
/// selection metrics; `label_floor` is the share of labels the scenario
/// flips, folded into the reported misclassification rate.
pub fn metrics(
    beta: &[f64],
    test: &Dataset,
    true_support: Option<&[usize]>,
    label_floor: Option<f64>,
) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    let f = test.linear_predictor(beta)?;
    let n = test.n();

    match test.task() {
        TaskKind::Regression => {
            let mut sq: Vec<f64> = (0..n).map(|i| (test.y()[i] - f[i]).powi(2)).collect();
            report.rmse = Some((sq.iter().sum::<f64>() / n as f64).sqrt());
            sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let keep = n - (TRIM_SHARE * n as f64).floor() as usize;
            report.trimmed_rmse =
                Some((sq[..keep].iter().sum::<f64>() / keep as f64).sqrt());
        }
        TaskKind::Classification => {
            let wrong = (0..n)
                .filter(|&i| {
                    let pred = if f[i] >= 0.0 { 1.0 } else { -1.0 };
                    pred != test.y()[i]
                })
                .count();
            let clean = wrong as f64 / n as f64;
            let floor = label_floor.unwrap_or(0.0);
            report.misclass_error = Some(floor + (1.0 - 2.0 * floor) * clean);
        }
        TaskKind::Binomial => {
            let wrong = (0..n)
                .filter(|&i| {
                    let pred = if f[i] >= 0.0 { 1.0 } else { 0.0 };
                    pred != test.y()[i]
                })
                .count();
            report.misclass_error = Some(wrong as f64 / n as f64);
        }
        TaskKind::Poisson => {
            let mse = (0..n)
                .map(|i| {
                    let mu = f[i].min(30.0).exp();
                    (test.y()[i] - mu).powi(2)
                })
                .sum::<f64>()
                / n as f64;
            report.rmse = Some(mse.sqrt());
        }
    }

    if let Some(signal) = true_support {
        let offset = usize::from(test.has_intercept());
        let selected: Vec<bool> = (0..test.p())
            .map(|j| beta[offset + j].abs() > SUPPORT_TOL)
            .collect();
        let n_signal = signal.len();
        let n_noise = test.p() - n_signal;
        if n_signal > 0 {
            let hit = signal.iter().filter(|&&j| selected[j]).count();
            report.sensitivity = Some(hit as f64 / n_signal as f64);
        }
        if n_noise > 0 {
            let excluded = (0..test.p())
                .filter(|j| !signal.contains(j) && !selected[*j])
                .count();
            report.specificity = Some(excluded as f64 / n_noise as f64);
        }
    }

    Ok(report)
}
