//! Cyclic coordinate descent for the weighted penalized quadratic losses.
//!
//! Handles the Gaussian residual loss and its classification twin: with
//! labels in {-1, +1}, `(1 - y f)^2 / 2 = (y - f)^2 / 2`, so both reduce
//! to weighted least squares onto `y`.

use super::{InnerProblem, InnerSolution};
use crate::error::{CocoError, Result};
use crate::loss::ConvexKind;

pub fn solve_weighted_gaussian(problem: &InnerProblem<'_>) -> Result<InnerSolution> {
    debug_assert!(matches!(
        problem.convex.kind(),
        ConvexKind::Gaussian | ConvexKind::GaussianC
    ));
    let data = problem.data;
    let w = problem.weights;
    let pen = problem.penalty;
    let n = data.n();
    let p = data.p();
    let inv_n = 1.0 / n as f64;
    let intercept = data.has_intercept();

    let mut beta = problem.warm_start.to_vec();
    let offset = usize::from(intercept);

    // residuals at the warm start
    let f = data.linear_predictor(&beta)?;
    let mut r: Vec<f64> = (0..n).map(|i| data.y()[i] - f[i]).collect();

    // per-coordinate curvature (1/n) sum_i w_i x_ij^2, fixed for the solve
    let mut curv = vec![0.0; p];
    for i in 0..n {
        if w[i] == 0.0 {
            continue;
        }
        let row = data.row(i);
        for j in 0..p {
            curv[j] += w[i] * row[j] * row[j];
        }
    }
    for c in curv.iter_mut() {
        *c *= inv_n;
    }
    let w_sum: f64 = w.iter().sum();
    if w_sum <= 0.0 {
        return Err(CocoError::Degenerate(
            "all observation weights are zero".into(),
        ));
    }

    let mut converged = false;
    for _sweep in 0..problem.settings.cd_max_sweeps {
        let mut max_delta = 0.0_f64;

        if intercept {
            let mut wr = 0.0;
            for i in 0..n {
                wr += w[i] * r[i];
            }
            let delta = wr / w_sum;
            if delta != 0.0 {
                beta[0] += delta;
                for ri in r.iter_mut() {
                    *ri -= delta;
                }
                max_delta = max_delta.max(delta.abs());
            }
        }

        for j in 0..p {
            if curv[j] <= 0.0 {
                continue; // no weighted mass on this column
            }
            let old = beta[offset + j];
            let mut rho = 0.0;
            for i in 0..n {
                if w[i] == 0.0 {
                    continue;
                }
                rho += w[i] * data.row(i)[j] * r[i];
            }
            rho = rho * inv_n + curv[j] * old;
            let new = pen.threshold(rho, curv[j]);
            if new != old {
                let delta = new - old;
                beta[offset + j] = new;
                for i in 0..n {
                    r[i] -= delta * data.row(i)[j];
                }
                max_delta = max_delta.max(delta.abs());
            }
        }

        if max_delta < problem.settings.cd_tol {
            converged = true;
            break;
        }
    }

    Ok(InnerSolution { beta, converged })
}
