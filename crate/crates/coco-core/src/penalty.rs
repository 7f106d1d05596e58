//! Penalties: the alpha-mix of a sparsity penalty (LASSO or SCAD) and a
//! ridge term,
//!
//! `Lambda(beta) = sum_j [ alpha * p_lambda(|beta_j|) + lambda (1-alpha)/2 beta_j^2 ]`,
//!
//! summed over the penalized coordinates only (the intercept is never
//! penalized), plus the scalar thresholding operators used by coordinate
//! descent.

use crate::error::{CocoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyFamily {
    Lasso,
    Scad,
}

impl PenaltyFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PenaltyFamily::Lasso => "lasso",
            PenaltyFamily::Scad => "scad",
        }
    }

    pub fn parse(name: &str) -> Result<PenaltyFamily> {
        match name {
            "lasso" => Ok(PenaltyFamily::Lasso),
            "scad" => Ok(PenaltyFamily::Scad),
            _ => Err(CocoError::Validation(format!(
                "unknown penalty family '{name}'; valid families: lasso, scad"
            ))),
        }
    }
}

impl std::fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const SCAD_DEFAULT_A: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    family: PenaltyFamily,
    lambda: f64,
    alpha: f64,
    /// SCAD shape parameter, > 2.
    scad_a: f64,
}

impl PenaltySpec {
    pub fn lasso(lambda: f64, alpha: f64) -> Result<PenaltySpec> {
        Self::build(PenaltyFamily::Lasso, lambda, alpha, SCAD_DEFAULT_A)
    }

    pub fn scad(lambda: f64, alpha: f64) -> Result<PenaltySpec> {
        Self::build(PenaltyFamily::Scad, lambda, alpha, SCAD_DEFAULT_A)
    }

    pub fn scad_with_a(lambda: f64, alpha: f64, a: f64) -> Result<PenaltySpec> {
        Self::build(PenaltyFamily::Scad, lambda, alpha, a)
    }

    pub fn new(family: PenaltyFamily, lambda: f64, alpha: f64, a: f64) -> Result<PenaltySpec> {
        Self::build(family, lambda, alpha, a)
    }

    /// The unpenalized spec (`lambda = 0`).
    pub fn none() -> PenaltySpec {
        PenaltySpec {
            family: PenaltyFamily::Lasso,
            lambda: 0.0,
            alpha: 1.0,
            scad_a: SCAD_DEFAULT_A,
        }
    }

    fn build(family: PenaltyFamily, lambda: f64, alpha: f64, a: f64) -> Result<PenaltySpec> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(CocoError::Validation(format!(
                "lambda must be a finite nonnegative real, got {lambda}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CocoError::Validation(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if family == PenaltyFamily::Scad && !(a > 2.0) {
            return Err(CocoError::Validation(format!(
                "SCAD requires a > 2, got {a}"
            )));
        }
        Ok(PenaltySpec {
            family,
            lambda,
            alpha,
            scad_a: a,
        })
    }

    pub fn family(&self) -> PenaltyFamily {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scad_a(&self) -> f64 {
        self.scad_a
    }

    /// Same spec at a different `lambda` (for tuning paths).
    pub fn at_lambda(&self, lambda: f64) -> Result<PenaltySpec> {
        Self::build(self.family, lambda, self.alpha, self.scad_a)
    }

    /// Sparsity penalty `p_lambda(theta)` for `theta >= 0`.
    pub fn penalty_value(&self, theta: f64) -> f64 {
        let t = theta.abs();
        let lam = self.lambda;
        match self.family {
            PenaltyFamily::Lasso => lam * t,
            PenaltyFamily::Scad => {
                let a = self.scad_a;
                if t <= lam {
                    lam * t
                } else if t <= a * lam {
                    (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0))
                } else {
                    lam * lam * (a + 1.0) / 2.0
                }
            }
        }
    }

    /// Right derivative `p'_lambda(theta+)` for `theta >= 0`.
    pub fn penalty_deriv(&self, theta: f64) -> f64 {
        let t = theta.abs();
        let lam = self.lambda;
        match self.family {
            PenaltyFamily::Lasso => lam,
            PenaltyFamily::Scad => {
                let a = self.scad_a;
                if t <= lam {
                    lam
                } else {
                    ((a * lam - t).max(0.0)) / (a - 1.0)
                }
            }
        }
    }

    /// `Lambda(beta)` over the given penalized coordinates (intercept
    /// already excluded by the caller).
    pub fn eval(&self, penalized: &[f64]) -> f64 {
        let ridge = self.lambda * (1.0 - self.alpha) / 2.0;
        penalized
            .iter()
            .map(|&b| self.alpha * self.penalty_value(b.abs()) + ridge * b * b)
            .sum()
    }

    /// `Lambda(beta)` for a full coefficient vector whose leading entry is
    /// an unpenalized intercept (when `has_intercept` is set).
    pub fn eval_beta(&self, beta: &[f64], has_intercept: bool) -> f64 {
        if has_intercept {
            self.eval(&beta[1..])
        } else {
            self.eval(beta)
        }
    }

    /// Minimizer of the one-dimensional penalized quadratic
    ///
    /// `q(b) = curvature/2 * b^2 - rho * b + alpha * p_lambda(|b|)
    ///         + lambda (1-alpha)/2 * b^2`.
    ///
    /// LASSO reduces to soft-thresholding with ridge shrinkage; SCAD uses
    /// the exact three-zone rule, falling back to zone-boundary evaluation
    /// when a zone's quadratic is non-convex at low curvature.
    pub fn threshold(&self, rho: f64, curvature: f64) -> f64 {
        let curv = curvature + self.lambda * (1.0 - self.alpha);
        if curv <= 0.0 {
            return 0.0;
        }
        let lam = self.alpha * self.lambda;
        match self.family {
            PenaltyFamily::Lasso => soft_threshold(rho, lam) / curv,
            PenaltyFamily::Scad => {
                if self.lambda == 0.0 {
                    return rho / curv;
                }
                let sign = if rho < 0.0 { -1.0 } else { 1.0 };
                let r = rho.abs();
                let a = self.scad_a;
                let lam0 = self.lambda;
                let q = |t: f64| {
                    curv / 2.0 * t * t - r * t + self.alpha * self.penalty_value(t)
                };
                // zone 1: t in [0, lambda]
                let mut best = ((r - lam).max(0.0) / curv).clamp(0.0, lam0);
                let mut best_q = q(best);
                // zone 2: t in [lambda, a*lambda]; quadratic coefficient may
                // lose convexity when curv <= alpha/(a-1)
                let c2 = curv - self.alpha / (a - 1.0);
                let candidates_2: &[f64] = if c2 > 0.0 {
                    &[((r - self.alpha * a * lam0 / (a - 1.0)) / c2).clamp(lam0, a * lam0)]
                } else {
                    &[lam0, a * lam0]
                };
                for &t in candidates_2 {
                    let qt = q(t);
                    if qt < best_q {
                        best_q = qt;
                        best = t;
                    }
                }
                // zone 3: t >= a*lambda, penalty constant
                let t3 = (r / curv).max(a * lam0);
                if q(t3) < best_q {
                    best = t3;
                }
                sign * best
            }
        }
    }
}

pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
