//! Composite losses `Gamma = g(s(u))`: a nondecreasing closed concave
//! component applied to a convex component.

mod concave;
mod convex;

pub use concave::{ConcaveKind, ConcaveSpec, ECAVE_DELTA_FACTOR, GCAVE_SMALL_SIGMA_DELTA};
pub use convex::{log1pexp, ConvexKind, ConvexSpec};

use crate::data::TaskKind;
use crate::error::{CocoError, Result};

/// A concave/convex pair defining the loss `Gamma(u) = g(s(u))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeLoss {
    pub concave: ConcaveSpec,
    pub convex: ConvexSpec,
}

impl CompositeLoss {
    pub fn new(concave: ConcaveSpec, convex: ConvexSpec) -> CompositeLoss {
        CompositeLoss { concave, convex }
    }

    /// `Gamma(u) = g(s(u))`; `y` is forwarded to exponential-family
    /// convex components.
    pub fn gamma(&self, u: f64, y: Option<f64>) -> Result<f64> {
        let z = self.convex.eval(u, y)?;
        self.eval_extended(z)
    }

    /// `g` extended linearly below zero with the origin slope.
    ///
    /// Exponential-family likelihoods without their data-dependent
    /// constants can dip below zero; the linear extension keeps `g`
    /// concave on the whole line so the conjugate majorization (and with
    /// it the descent guarantee of the outer loop) is preserved. For the
    /// components with range in `[0, inf)` this never triggers.
    pub fn eval_extended(&self, z: f64) -> Result<f64> {
        if z < 0.0 {
            Ok(self.concave.weight_at_origin() * z)
        } else {
            self.concave.eval(z)
        }
    }

    /// Subdifferential element of `-g` at `z`, using the linear extension
    /// below zero.
    pub fn neg_subgradient_extended(&self, z: f64) -> Result<f64> {
        if z < 0.0 {
            Ok(-self.concave.weight_at_origin())
        } else {
            self.concave.neg_subgradient(z)
        }
    }

    /// The tasks this composite can be fitted on.
    pub fn compatible_tasks(&self) -> &'static [TaskKind] {
        match self.convex.kind() {
            ConvexKind::Gaussian | ConvexKind::EpsInsensitive => &[TaskKind::Regression],
            ConvexKind::GaussianC | ConvexKind::Hinge => &[TaskKind::Classification],
            ConvexKind::Binomial => &[TaskKind::Classification, TaskKind::Binomial],
            ConvexKind::Poisson => &[TaskKind::Poisson],
        }
    }

    pub fn check_task(&self, task: TaskKind) -> Result<()> {
        if self.compatible_tasks().contains(&task) {
            Ok(())
        } else {
            Err(CocoError::Validation(format!(
                "convex component {} cannot be fitted on a {task} task",
                self.convex.kind()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn central_diff(f: impl Fn(f64) -> f64, u: f64, h: f64) -> f64 {
        (f(u + h) - f(u - h)) / (2.0 * h)
    }

    #[test]
    fn composite_chain_rule() {
        // |Gamma'(u) - g'(s(u)) s'(u)| small against central differences
        // for a smooth pair, at pseudo-random points.
        let loss = CompositeLoss::new(
            ConcaveSpec::new(ConcaveKind::Ccave, 1.3).unwrap(),
            ConvexSpec::new(ConvexKind::Gaussian).unwrap(),
        );
        let mut state = 0x9e3779b97f4a7c15_u64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = ((state >> 11) as f64 / (1u64 << 53) as f64) * 10.0 - 5.0;
            let h = 1e-6;
            let fd = central_diff(|v| loss.gamma(v, None).unwrap(), u, h);
            let z = loss.convex.eval(u, None).unwrap();
            let chain = -loss.concave.neg_subgradient(z).unwrap() * u; // s'(u) = u
            assert_abs_diff_eq!(fd, chain, epsilon = 1e-6);
        }
    }

    #[test]
    fn extension_is_continuous_and_concave_at_zero() {
        let loss = CompositeLoss::new(
            ConcaveSpec::new(ConcaveKind::Ccave, 1.0).unwrap(),
            ConvexSpec::new(ConvexKind::Poisson).unwrap(),
        );
        assert_eq!(loss.eval_extended(0.0).unwrap(), 0.0);
        let w0 = loss.concave.weight_at_origin();
        assert_abs_diff_eq!(loss.eval_extended(-2.0).unwrap(), -2.0 * w0, epsilon = 1e-15);
        assert_eq!(loss.neg_subgradient_extended(-2.0).unwrap(), -w0);
        // slope from the left equals the right-derivative at the origin
        let right = (loss.eval_extended(1e-8).unwrap() - 0.0) / 1e-8;
        assert_abs_diff_eq!(right, w0, epsilon = 1e-6);
    }

    #[test]
    fn task_compatibility() {
        let loss = CompositeLoss::new(
            ConcaveSpec::new(ConcaveKind::Tcave, 1.0).unwrap(),
            ConvexSpec::new(ConvexKind::Gaussian).unwrap(),
        );
        assert!(loss.check_task(TaskKind::Regression).is_ok());
        assert!(loss.check_task(TaskKind::Classification).is_err());
        let logit = CompositeLoss::new(
            ConcaveSpec::new(ConcaveKind::Dcave, 1.0).unwrap(),
            ConvexSpec::new(ConvexKind::Binomial).unwrap(),
        );
        assert!(logit.check_task(TaskKind::Classification).is_ok());
        assert!(logit.check_task(TaskKind::Binomial).is_ok());
        assert!(logit.check_task(TaskKind::Poisson).is_err());
    }
}
