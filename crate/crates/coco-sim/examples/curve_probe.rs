//! Prints tune-loss and test-error across the lambda path for one run.

use coco_core::engine::{fit, objective, FitConfig, Init};
use coco_core::{CompositeLoss, ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec, PenaltySpec};
use coco_sim::{derive_seed, generate, lambda_grid, metrics, ScenarioSpec};

fn main() {
    let gaussian_c = ConvexSpec::new(ConvexKind::GaussianC).unwrap();
    let loss = CompositeLoss::new(
        ConcaveSpec::new(ConcaveKind::Hcave, 1.0).unwrap(),
        gaussian_c,
    );
    let spec = ScenarioSpec::ex3(0.2, derive_seed(2024, 3));
    let data = generate(&spec).unwrap();
    let tune = data.tune.as_ref().unwrap();
    let grid = lambda_grid(&data.train, 1.0);
    let none = PenaltySpec::none();
    let mut warm: Option<Vec<f64>> = None;
    println!("{:>4} {:>10} {:>10} {:>8} {:>6}", "i", "lambda", "tuneloss", "err", "nnz");
    for (i, &lambda) in grid.iter().enumerate() {
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
        let nnz = result.beta.iter().filter(|b| b.abs() > 1e-8).count();
        if i % 2 == 0 {
            println!("{i:>4} {lambda:>10.5} {tune_loss:>10.5} {err:>8.4} {nnz:>6}");
        }
    }
}
