//! Quick desk check of the Example 1 comparison.

use coco_sim::{ex1_estimators, run_mc, Contamination, ScenarioSpec};

fn main() {
    let estimators = ex1_estimators();
    for contamination in [
        Contamination::None,
        Contamination::Vertical,
        Contamination::VerticalLeverage,
    ] {
        let spec = ScenarioSpec::ex1(contamination, 2024);
        let start = std::time::Instant::now();
        let out = run_mc(&spec, &estimators, 25).unwrap();
        println!("--- {} ({:.1?})", out.scenario, start.elapsed());
        for est in &out.estimator_names {
            if let Some(rmse) = out.mean_of(est, "rmse") {
                println!("{est:>12}  rmse = {rmse:.3}");
            }
        }
    }
}
