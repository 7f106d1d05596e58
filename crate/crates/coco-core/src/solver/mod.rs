//! Weighted penalized inner solvers.
//!
//! Every outer reweighting step reduces to
//!
//! `argmin_beta  (1/n) sum_i w_i s(u_i(beta)) + Lambda(beta)`
//!
//! for fixed nonnegative observation weights `w_i`. The solver used
//! depends on the convex component: coordinate descent for the quadratic
//! losses, penalized IRLS for the exponential-family likelihoods and
//! proximal subgradient descent for the piecewise-linear losses.
//!
//! All paths guarantee the returned coefficients never have a larger
//! weighted objective than the warm start; the outer loops rely on this
//! for their descent property.

mod cd;
mod glm;
mod subgradient;

pub use cd::solve_weighted_gaussian;
pub use glm::solve_weighted_glm;
pub use subgradient::solve_weighted_piecewise;

use crate::data::{Dataset, TaskKind};
use crate::error::{CocoError, Result};
use crate::loss::{ConvexKind, ConvexSpec};
use crate::penalty::PenaltySpec;

/// Tolerances and iteration caps for the inner solvers.
///
/// Inner solves are repeated many times with warm starts, so the
/// defaults favor moderate precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSettings {
    /// Coordinate-descent stop: max absolute coefficient change per sweep.
    pub cd_tol: f64,
    /// Maximum coordinate-descent sweeps.
    pub cd_max_sweeps: usize,
    /// IRLS stop: relative change of the penalized objective.
    pub glm_tol: f64,
    /// Maximum IRLS steps.
    pub glm_max_iter: usize,
    /// Subgradient stop: relative objective improvement per check window.
    pub sub_tol: f64,
    /// Maximum subgradient steps.
    pub sub_max_iter: usize,
    /// Multiplier on the `c / sqrt(t)` subgradient step size.
    pub sub_step_scale: f64,
}

impl Default for InnerSettings {
    fn default() -> Self {
        InnerSettings {
            cd_tol: 1e-7,
            cd_max_sweeps: 10_000,
            glm_tol: 1e-6,
            glm_max_iter: 100,
            sub_tol: 1e-4,
            sub_max_iter: 50_000,
            sub_step_scale: 1.0,
        }
    }
}

/// One weighted penalized minimization.
pub struct InnerProblem<'a> {
    pub data: &'a Dataset,
    pub weights: &'a [f64],
    pub convex: &'a ConvexSpec,
    pub penalty: &'a PenaltySpec,
    pub warm_start: &'a [f64],
    pub settings: InnerSettings,
}

/// Solver output; `converged = false` marks an iteration-capped
/// piecewise solve (a warning, not an error).
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub beta: Vec<f64>,
    pub converged: bool,
}

impl<'a> InnerProblem<'a> {
    fn validate(&self) -> Result<()> {
        let n = self.data.n();
        if n < 1 {
            return Err(CocoError::Degenerate("dataset has no rows".into()));
        }
        if self.weights.len() != n {
            return Err(CocoError::Validation(format!(
                "weight vector has length {}, expected {n}",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CocoError::Validation(
                "observation weights must be finite and nonnegative".into(),
            ));
        }
        if self.weights.iter().all(|w| *w == 0.0) {
            return Err(CocoError::Degenerate(
                "all observation weights are zero".into(),
            ));
        }
        if self.warm_start.len() != self.data.n_coefs() {
            return Err(CocoError::Validation(format!(
                "warm start has length {}, expected {}",
                self.warm_start.len(),
                self.data.n_coefs()
            )));
        }
        let task = self.data.task();
        let compatible = match self.convex.kind() {
            ConvexKind::Gaussian | ConvexKind::EpsInsensitive => task == TaskKind::Regression,
            ConvexKind::GaussianC | ConvexKind::Hinge => task == TaskKind::Classification,
            ConvexKind::Binomial => {
                task == TaskKind::Classification || task == TaskKind::Binomial
            }
            ConvexKind::Poisson => task == TaskKind::Poisson,
        };
        if !compatible {
            return Err(CocoError::Validation(format!(
                "convex component {} cannot be fitted on a {task} task",
                self.convex.kind()
            )));
        }
        Ok(())
    }

    /// `(1/n) sum_i w_i s(u_i(beta)) + Lambda(beta)`.
    pub fn objective(&self, beta: &[f64]) -> Result<f64> {
        weighted_objective(self.data, self.weights, self.convex, self.penalty, beta)
    }
}

/// The weighted penalized objective shared by all solver paths.
pub fn weighted_objective(
    data: &Dataset,
    weights: &[f64],
    convex: &ConvexSpec,
    penalty: &PenaltySpec,
    beta: &[f64],
) -> Result<f64> {
    let u = data.margins(beta)?;
    let pass_y = data.task().passes_response_to_loss();
    let mut acc = 0.0;
    for i in 0..data.n() {
        if weights[i] == 0.0 {
            continue;
        }
        let y = if pass_y { Some(data.y()[i]) } else { None };
        acc += weights[i] * convex.eval(u[i], y)?;
    }
    Ok(acc / data.n() as f64 + penalty.eval_beta(beta, data.has_intercept()))
}

/// Dispatches to the solver matching the convex component.
pub fn solve_weighted(problem: &InnerProblem<'_>) -> Result<InnerSolution> {
    problem.validate()?;
    let mut solution = match problem.convex.kind() {
        ConvexKind::Gaussian | ConvexKind::GaussianC => solve_weighted_gaussian(problem)?,
        ConvexKind::Binomial | ConvexKind::Poisson => solve_weighted_glm(problem)?,
        ConvexKind::Hinge | ConvexKind::EpsInsensitive => solve_weighted_piecewise(problem)?,
    };
    // never hand back something worse than the warm start
    let warm_obj = problem.objective(problem.warm_start)?;
    let new_obj = problem.objective(&solution.beta)?;
    if !(new_obj <= warm_obj) {
        solution.beta = problem.warm_start.to_vec();
    }
    Ok(solution)
}
