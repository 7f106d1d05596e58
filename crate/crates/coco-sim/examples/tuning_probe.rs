//! Diagnoses the tuning-selection gap on the classification design:
//! tuned-lambda test error vs the best achievable over the same grid.

use coco_core::engine::{fit, objective, FitConfig, Init};
use coco_core::{CompositeLoss, ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec, PenaltySpec};
use coco_sim::{derive_seed, generate, lambda_grid, metrics, ScenarioSpec};

fn main() {
    let gaussian_c = ConvexSpec::new(ConvexKind::GaussianC).unwrap();
    for (kind, sigma) in [
        (ConcaveKind::Hcave, 1.0),
        (ConcaveKind::Ccave, 1.5),
        (ConcaveKind::Gcave, 1.5),
    ] {
        let loss = CompositeLoss::new(ConcaveSpec::new(kind, sigma).unwrap(), gaussian_c);
        let mut tuned_sum = 0.0;
        let mut oracle_sum = 0.0;
        let runs = 10;
        for run in 0..runs {
            let spec = ScenarioSpec::ex3(0.2, derive_seed(2024, run));
            let data = generate(&spec).unwrap();
            let tune = data.tune.as_ref().unwrap();
            let grid = lambda_grid(&data.train, 1.0);
            let none = PenaltySpec::none();
            let mut warm: Option<Vec<f64>> = None;
            let mut best_tune = f64::INFINITY;
            let mut tuned_err = f64::NAN;
            let mut oracle_err = f64::INFINITY;
            for &lambda in &grid {
                let pen = PenaltySpec::scad(lambda, 1.0).unwrap();
                let config = FitConfig {
                    init: warm.clone().map(Init::User).unwrap_or(Init::Zeros),
                    ..FitConfig::default()
                };
                let result = fit(&data.train, &loss, &pen, &config).unwrap();
                warm = Some(result.beta.clone());
                let tune_loss = objective(&result.beta, tune, &loss, &none).unwrap();
                let err = metrics(&result.beta, &data.test, None, Some(0.2))
                    .unwrap()
                    .misclass_error
                    .unwrap();
                if tune_loss < best_tune {
                    best_tune = tune_loss;
                    tuned_err = err;
                }
                oracle_err = oracle_err.min(err);
            }
            tuned_sum += tuned_err;
            oracle_sum += oracle_err;
        }
        println!(
            "{:?}({sigma}) SCAD: tuned = {:.3}, grid-oracle = {:.3}",
            kind,
            tuned_sum / runs as f64,
            oracle_sum / runs as f64
        );
    }
}
