//! Weighted penalized IRLS for the exponential-family losses.
//!
//! Each step builds the quadratic approximation of the weighted negative
//! log-likelihood at the current coefficients (working response and
//! curvature weights), solves it with penalized coordinate descent and
//! applies step-halving whenever the true penalized objective would rise.

use super::{InnerProblem, InnerSolution};
use crate::error::{CocoError, Result};
use crate::loss::{log1pexp, ConvexKind};
use crate::penalty::PenaltySpec;

/// Linear predictors are clamped to this magnitude inside `exp`;
/// protects the working weights on separable or contaminated data.
const ETA_CLAMP: f64 = 30.0;
const MIN_VARIANCE: f64 = 1e-10;
const MAX_HALVINGS: usize = 20;

pub fn solve_weighted_glm(problem: &InnerProblem<'_>) -> Result<InnerSolution> {
    let kind = problem.convex.kind();
    debug_assert!(matches!(kind, ConvexKind::Binomial | ConvexKind::Poisson));
    let data = problem.data;
    let n = data.n();
    let w = problem.weights;

    // responses on the likelihood scale: {0,1} for binomial (classification
    // labels map from {-1,+1}), counts for poisson
    let y01: Vec<f64> = match kind {
        ConvexKind::Binomial => data
            .y()
            .iter()
            .map(|&y| if y == -1.0 { 0.0 } else { y })
            .collect(),
        _ => data.y().to_vec(),
    };

    let nll = |beta: &[f64]| -> Result<f64> {
        let f = data.linear_predictor(beta)?;
        let mut acc = 0.0;
        for i in 0..n {
            if w[i] == 0.0 {
                continue;
            }
            let s = match kind {
                ConvexKind::Binomial => -y01[i] * f[i] + log1pexp(f[i]),
                _ => -y01[i] * f[i] + f[i].exp(),
            };
            acc += w[i] * s;
        }
        Ok(acc / n as f64 + problem.penalty.eval_beta(beta, data.has_intercept()))
    };

    let mut beta = problem.warm_start.to_vec();
    let mut obj = nll(&beta)?;
    let mut trace = vec![obj];
    let mut converged = false;

    for _iter in 0..problem.settings.glm_max_iter {
        let f = data.linear_predictor(&beta)?;
        let mut omega = vec![0.0; n];
        let mut zeta = vec![0.0; n];
        for i in 0..n {
            let eta = f[i].clamp(-ETA_CLAMP, ETA_CLAMP);
            let (mu, var) = match kind {
                ConvexKind::Binomial => {
                    let mu = 1.0 / (1.0 + (-eta).exp());
                    (mu, (mu * (1.0 - mu)).max(MIN_VARIANCE))
                }
                _ => {
                    let mu = eta.exp();
                    (mu, mu.max(MIN_VARIANCE))
                }
            };
            omega[i] = w[i] * var;
            zeta[i] = eta + (y01[i] - mu) / var;
        }

        let candidate = weighted_cd_on_working_response(problem, &omega, &zeta, &beta)?;

        // step-halving on the true penalized objective
        let mut step = candidate;
        let mut step_obj = nll(&step)?;
        let mut halvings = 0;
        while !(step_obj <= obj + 1e-12) && halvings < MAX_HALVINGS {
            for (s, b) in step.iter_mut().zip(&beta) {
                *s = (*s + *b) / 2.0;
            }
            step_obj = nll(&step)?;
            halvings += 1;
        }
        if !(step_obj <= obj + 1e-12) {
            if step_obj.is_finite() && (step_obj - obj).abs() <= 1e-10 * (1.0 + obj.abs()) {
                // numerically flat; accept the current point as converged
                converged = true;
                break;
            }
            return Err(CocoError::Convergence {
                message: format!(
                    "{kind} IRLS objective rose from {obj} to {step_obj} after {MAX_HALVINGS} halvings"
                ),
                trace,
            });
        }

        let rel = (obj - step_obj).abs() / (1.0 + obj.abs());
        beta = step;
        obj = step_obj;
        trace.push(obj);
        if rel < problem.settings.glm_tol {
            converged = true;
            break;
        }
    }

    Ok(InnerSolution { beta, converged })
}

/// Penalized weighted least squares onto the working response, reusing
/// the same threshold operator as the Gaussian path.
fn weighted_cd_on_working_response(
    problem: &InnerProblem<'_>,
    omega: &[f64],
    zeta: &[f64],
    warm: &[f64],
) -> Result<Vec<f64>> {
    let data = problem.data;
    let pen: &PenaltySpec = problem.penalty;
    let n = data.n();
    let p = data.p();
    let inv_n = 1.0 / n as f64;
    let intercept = data.has_intercept();
    let offset = usize::from(intercept);

    let mut beta = warm.to_vec();
    let f = data.linear_predictor(&beta)?;
    let mut r: Vec<f64> = (0..n).map(|i| zeta[i] - f[i]).collect();

    let mut curv = vec![0.0; p];
    for i in 0..n {
        if omega[i] == 0.0 {
            continue;
        }
        let row = data.row(i);
        for j in 0..p {
            curv[j] += omega[i] * row[j] * row[j];
        }
    }
    for c in curv.iter_mut() {
        *c *= inv_n;
    }
    let w_sum: f64 = omega.iter().sum();
    if w_sum <= 0.0 {
        return Err(CocoError::Degenerate(
            "IRLS working weights vanished".into(),
        ));
    }

    for _sweep in 0..problem.settings.cd_max_sweeps {
        let mut max_delta = 0.0_f64;
        if intercept {
            let mut wr = 0.0;
            for i in 0..n {
                wr += omega[i] * r[i];
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
                continue;
            }
            let old = beta[offset + j];
            let mut rho = 0.0;
            for i in 0..n {
                if omega[i] == 0.0 {
                    continue;
                }
                rho += omega[i] * data.row(i)[j] * r[i];
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
            break;
        }
    }
    Ok(beta)
}
