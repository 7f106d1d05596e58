//! Convex components `s` of the composite losses.
//!
//! The argument `u` is the task-dependent margin: a residual for
//! regression, `y * f` for classification with labels in {-1, +1}, and
//! the linear predictor itself for exponential-family models (which also
//! need the observed response `y` to evaluate the negative log-likelihood).

use crate::error::{CocoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvexKind {
    /// `u^2 / 2` on residuals.
    Gaussian,
    /// `(1-u)^2 / 2` on margins; squared error written for labels in {-1, +1}.
    GaussianC,
    /// Logistic deviance: `log(1 + exp(-u))` on margins, or the {0,1}
    /// negative log-likelihood `-y u + log(1 + exp(u))` when `y` is given.
    Binomial,
    /// Poisson negative log-likelihood `-y u + exp(u)` (requires `y`).
    Poisson,
    /// `max(0, 1 - u)` on margins.
    Hinge,
    /// `max(0, |u| - epsilon)` on residuals.
    EpsInsensitive,
}

impl ConvexKind {
    pub const ALL: [ConvexKind; 6] = [
        ConvexKind::Gaussian,
        ConvexKind::GaussianC,
        ConvexKind::Binomial,
        ConvexKind::Poisson,
        ConvexKind::Hinge,
        ConvexKind::EpsInsensitive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConvexKind::Gaussian => "gaussian",
            ConvexKind::GaussianC => "gaussianC",
            ConvexKind::Binomial => "binomial",
            ConvexKind::Poisson => "poisson",
            ConvexKind::Hinge => "hinge",
            ConvexKind::EpsInsensitive => "epsInsensitive",
        }
    }

    pub fn parse(name: &str) -> Result<ConvexKind> {
        ConvexKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                CocoError::Validation(format!(
                    "unknown convex component '{name}'; valid names: {}",
                    ConvexKind::ALL
                        .iter()
                        .map(|k| k.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }
}

impl std::fmt::Display for ConvexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A convex component with its parameter, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexSpec {
    kind: ConvexKind,
    /// Tube half-width; present only for the epsilon-insensitive loss.
    epsilon: Option<f64>,
}

impl ConvexSpec {
    pub fn new(kind: ConvexKind) -> Result<ConvexSpec> {
        if kind == ConvexKind::EpsInsensitive {
            return Err(CocoError::Validation(
                "epsInsensitive requires an epsilon; use with_epsilon".into(),
            ));
        }
        Ok(ConvexSpec {
            kind,
            epsilon: None,
        })
    }

    pub fn with_epsilon(epsilon: f64) -> Result<ConvexSpec> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(CocoError::Validation(format!(
                "epsInsensitive requires epsilon >= 0, got {epsilon}"
            )));
        }
        Ok(ConvexSpec {
            kind: ConvexKind::EpsInsensitive,
            epsilon: Some(epsilon),
        })
    }

    pub fn kind(&self) -> ConvexKind {
        self.kind
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// Evaluates `s(u)`; `y` is required for the Poisson likelihood and
    /// switches the binomial component to its {0,1} likelihood form.
    pub fn eval(&self, u: f64, y: Option<f64>) -> Result<f64> {
        Ok(match self.kind {
            ConvexKind::Gaussian => u * u / 2.0,
            ConvexKind::GaussianC => (1.0 - u) * (1.0 - u) / 2.0,
            ConvexKind::Binomial => match y {
                Some(y) => -y * u + log1pexp(u),
                None => log1pexp(-u),
            },
            ConvexKind::Poisson => {
                let y = y.ok_or_else(|| {
                    CocoError::Validation(
                        "poisson loss needs the observed count y".into(),
                    )
                })?;
                -y * u + u.exp()
            }
            ConvexKind::Hinge => (1.0 - u).max(0.0),
            ConvexKind::EpsInsensitive => {
                (u.abs() - self.epsilon.expect("epsilon present")).max(0.0)
            }
        })
    }

    /// Interior breakpoints of `s` in `u`-space (non-smooth points).
    pub fn knots(&self) -> Vec<f64> {
        match self.kind {
            ConvexKind::Hinge => vec![1.0],
            ConvexKind::EpsInsensitive => {
                let e = self.epsilon.expect("epsilon present");
                if e > 0.0 {
                    vec![-e, e]
                } else {
                    vec![0.0]
                }
            }
            _ => vec![],
        }
    }
}

/// `log(1 + exp(x))` with stable branches for large `|x|`.
pub fn log1pexp(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn table_values() {
        let s = ConvexSpec::new(ConvexKind::Gaussian).unwrap();
        assert_eq!(s.eval(3.0, None).unwrap(), 4.5);
        let s = ConvexSpec::new(ConvexKind::Hinge).unwrap();
        assert_eq!(s.eval(2.0, None).unwrap(), 0.0);
        assert_eq!(s.eval(-1.0, None).unwrap(), 2.0);
        let s = ConvexSpec::new(ConvexKind::Poisson).unwrap();
        assert_eq!(s.eval(0.0, Some(3.0)).unwrap(), 1.0);
        assert_abs_diff_eq!(
            s.eval(0.3, Some(2.0)).unwrap(),
            0.749858807576003103983744313328,
            epsilon = 1e-15
        );
        let s = ConvexSpec::with_epsilon(0.5).unwrap();
        assert_eq!(s.eval(-2.0, None).unwrap(), 1.5);
        assert_eq!(s.eval(0.3, None).unwrap(), 0.0);
        let s = ConvexSpec::new(ConvexKind::GaussianC).unwrap();
        assert_eq!(s.eval(-1.0, None).unwrap(), 2.0);
    }

    #[test]
    fn binomial_forms() {
        let s = ConvexSpec::new(ConvexKind::Binomial).unwrap();
        // margin form
        assert_abs_diff_eq!(
            s.eval(-1.2, None).unwrap(),
            1.46328246733803118918774446244,
            epsilon = 1e-15
        );
        // likelihood form agrees with the margin form under the
        // label map y10 = (y +/- 1)/2, u = y * f
        for f in [-3.0, -0.4, 0.0, 1.7] {
            for y in [-1.0, 1.0] {
                let margin = s.eval(y * f, None).unwrap();
                let lik = s.eval(f, Some((y + 1.0) / 2.0)).unwrap();
                assert_abs_diff_eq!(margin, lik, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn poisson_requires_y() {
        let s = ConvexSpec::new(ConvexKind::Poisson).unwrap();
        assert!(matches!(s.eval(0.0, None), Err(CocoError::Validation(_))));
    }

    #[test]
    fn log1pexp_stable() {
        assert_eq!(log1pexp(1000.0), 1000.0);
        assert!(log1pexp(-1000.0) >= 0.0);
        assert_abs_diff_eq!(log1pexp(0.0), std::f64::consts::LN_2, epsilon = 1e-15);
        // the guarded branches agree with the exact identity
        // log(1 + e^x) = x + log(1 + e^-x) at the cut
        for x in [30.5, 35.0] {
            assert_abs_diff_eq!(log1pexp(x), x + (-x).exp().ln_1p(), epsilon = 1e-12);
        }
        for x in [-30.5, -35.0] {
            assert_abs_diff_eq!(log1pexp(x), x.exp().ln_1p(), epsilon = 1e-15);
        }
    }

    #[test]
    fn midpoint_convexity_on_grid() {
        let specs = [
            ConvexSpec::new(ConvexKind::Gaussian).unwrap(),
            ConvexSpec::new(ConvexKind::GaussianC).unwrap(),
            ConvexSpec::new(ConvexKind::Binomial).unwrap(),
            ConvexSpec::new(ConvexKind::Hinge).unwrap(),
            ConvexSpec::with_epsilon(0.3).unwrap(),
        ];
        for s in specs {
            let grid: Vec<f64> = (-50..=50).map(|i| i as f64 / 5.0).collect();
            for (i, &a) in grid.iter().enumerate() {
                for &b in &grid[i..] {
                    let mid = s.eval((a + b) / 2.0, None).unwrap();
                    let avg =
                        (s.eval(a, None).unwrap() + s.eval(b, None).unwrap()) / 2.0;
                    assert!(
                        mid <= avg + 1e-12,
                        "{} fails midpoint convexity at ({a}, {b})",
                        s.kind()
                    );
                }
            }
        }
        // exponential-family variants, with y fixed
        let s = ConvexSpec::new(ConvexKind::Poisson).unwrap();
        for y in [0.0, 1.0, 4.0] {
            let grid: Vec<f64> = (-20..=20).map(|i| i as f64 / 5.0).collect();
            for (i, &a) in grid.iter().enumerate() {
                for &b in &grid[i..] {
                    let mid = s.eval((a + b) / 2.0, Some(y)).unwrap();
                    let avg =
                        (s.eval(a, Some(y)).unwrap() + s.eval(b, Some(y)).unwrap()) / 2.0;
                    assert!(mid <= avg + 1e-10);
                }
            }
        }
    }

    #[test]
    fn nonnegative_range_components() {
        for s in [
            ConvexSpec::new(ConvexKind::Gaussian).unwrap(),
            ConvexSpec::new(ConvexKind::GaussianC).unwrap(),
            ConvexSpec::new(ConvexKind::Hinge).unwrap(),
            ConvexSpec::with_epsilon(0.5).unwrap(),
        ] {
            let mut u = -20.0;
            while u <= 20.0 {
                assert!(s.eval(u, None).unwrap() >= 0.0);
                u += 0.1;
            }
        }
    }
}
