//! Proximal subgradient descent for the piecewise-linear losses
//! (hinge, epsilon-insensitive).
//!
//! Steps of size `c / sqrt(t)` on the smooth-plus-ridge part, the L1
//! part applied through its proximal map (soft-thresholding; SCAD via
//! local linearization of its derivative). Tracks a step-weighted
//! iterate average and returns the best-objective candidate seen,
//! warm start included.

use super::{InnerProblem, InnerSolution};
use crate::error::Result;
use crate::loss::ConvexKind;
use crate::penalty::{soft_threshold, PenaltyFamily};

const CHECK_EVERY: usize = 50;

pub fn solve_weighted_piecewise(problem: &InnerProblem<'_>) -> Result<InnerSolution> {
    let kind = problem.convex.kind();
    debug_assert!(matches!(
        kind,
        ConvexKind::Hinge | ConvexKind::EpsInsensitive
    ));
    let data = problem.data;
    let pen = problem.penalty;
    let n = data.n();
    let p = data.p();
    let inv_n = 1.0 / n as f64;
    let intercept = data.has_intercept();
    let offset = usize::from(intercept);
    let m = data.n_coefs();
    let w = problem.weights;
    let eps = problem.convex.epsilon().unwrap_or(0.0);
    let ridge = pen.lambda() * (1.0 - pen.alpha());

    // step scale: residual losses need to traverse the response range
    let c = problem.settings.sub_step_scale
        * match kind {
            ConvexKind::EpsInsensitive => {
                let mean_abs: f64 =
                    data.y().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
                mean_abs.max(1.0)
            }
            _ => 1.0,
        };

    let mut theta = problem.warm_start.to_vec();
    let mut best = theta.clone();
    let mut best_obj = problem.objective(&best)?;

    // step-weighted running average of the iterates
    let mut avg = theta.clone();
    let mut avg_mass = 0.0_f64;

    let mut grad = vec![0.0_f64; m];
    let mut last_checked = best_obj;
    let mut converged = false;

    for t in 1..=problem.settings.sub_max_iter {
        let f = data.linear_predictor(&theta)?;
        for g in grad.iter_mut() {
            *g = 0.0;
        }
        for i in 0..n {
            if w[i] == 0.0 {
                continue;
            }
            // d s(u_i)/d f_i, taking 0 on the flat side of each kink
            let dsdf = match kind {
                ConvexKind::Hinge => {
                    let y = data.y()[i];
                    if y * f[i] < 1.0 {
                        -y
                    } else {
                        0.0
                    }
                }
                _ => {
                    let u = data.y()[i] - f[i];
                    if u > eps {
                        -1.0
                    } else if u < -eps {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            if dsdf == 0.0 {
                continue;
            }
            let scale = w[i] * dsdf * inv_n;
            if intercept {
                grad[0] += scale;
            }
            let row = data.row(i);
            for j in 0..p {
                grad[offset + j] += scale * row[j];
            }
        }
        if ridge > 0.0 {
            for j in 0..p {
                grad[offset + j] += ridge * theta[offset + j];
            }
        }

        let step = c / (t as f64).sqrt();
        if intercept {
            theta[0] -= step * grad[0];
        }
        for j in 0..p {
            // SCAD linearizes its derivative at the pre-step magnitude
            let shrink = match pen.family() {
                PenaltyFamily::Lasso => pen.alpha() * pen.lambda(),
                PenaltyFamily::Scad => {
                    pen.alpha() * pen.penalty_deriv(theta[offset + j].abs())
                }
            };
            let moved = theta[offset + j] - step * grad[offset + j];
            theta[offset + j] = soft_threshold(moved, step * shrink);
        }

        avg_mass += step;
        for (a, th) in avg.iter_mut().zip(&theta) {
            *a += (step / avg_mass) * (th - *a);
        }

        let obj = problem.objective(&theta)?;
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&theta);
        }

        if t % CHECK_EVERY == 0 {
            let avg_obj = problem.objective(&avg)?;
            if avg_obj < best_obj {
                best_obj = avg_obj;
                best.copy_from_slice(&avg);
            }
            let rel = (last_checked - best_obj).abs() / (1.0 + best_obj.abs());
            if rel < problem.settings.sub_tol && t > CHECK_EVERY {
                converged = true;
                break;
            }
            last_checked = best_obj;
        }
    }

    if !converged {
        // iteration cap: flag only if the objective was still moving
        let rel = (last_checked - best_obj).abs() / (1.0 + best_obj.abs());
        converged = rel <= 100.0 * problem.settings.sub_tol;
    }

    Ok(InnerSolution {
        beta: best,
        converged,
    })
}
