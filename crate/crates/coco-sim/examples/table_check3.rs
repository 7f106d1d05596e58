//! Quick desk check of the Example 3 comparison.

use coco_sim::{ex3_estimators, run_mc, ScenarioSpec};

fn main() {
    let estimators = ex3_estimators();
    for flip in [0.0, 0.2] {
        let spec = ScenarioSpec::ex3(flip, 2024);
        let start = std::time::Instant::now();
        let out = run_mc(&spec, &estimators, 10).unwrap();
        println!("--- {} ({:.1?})", out.scenario, start.elapsed());
        for est in &out.estimator_names {
            let err = out.mean_of(est, "misclass_error").unwrap();
            let sen = out.mean_of(est, "sensitivity").unwrap_or(f64::NAN);
            let spc = out.mean_of(est, "specificity").unwrap_or(f64::NAN);
            println!("{est:>16}  err = {err:.3}  sen = {sen:.2}  spc = {spc:.2}");
        }
    }
}
