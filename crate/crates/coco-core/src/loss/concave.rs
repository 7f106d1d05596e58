//! Concave components `g` of the composite losses.
//!
//! Each component is a nondecreasing closed concave function on `z >= 0`
//! with `g(0) = 0` and a bounded subdifferential of `-g` everywhere,
//! including the origin. The observation weight used by the reweighting
//! loops is `-v` for `v` an element of the subdifferential of `-g(z)`;
//! it is nonincreasing in `z`, so observations with a large convex-loss
//! value are discounted.

use crate::error::{CocoError, Result};

/// The eight concave components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConcaveKind {
    /// Piecewise identity / square-root; composes to the Huber loss. Unbounded.
    Hcave,
    /// Cosine arc capped at `2*sigma^2`; composes to the Andrews loss.
    Acave,
    /// Cubic arc capped at `sigma^2/6`; composes to the biweight loss.
    Bcave,
    /// Saturating exponential `sigma^2 (1 - exp(-z/sigma^2))`.
    Ccave,
    /// Log-ratio `log((1+z)/(1+z e^-sigma)) / (1 - e^-sigma)`.
    Dcave,
    /// Error-function arc with a linear cap near the origin (parameter `delta`).
    Ecave,
    /// Power arc `(z/(1+z))^sigma / sigma` with a linear cap (parameter `delta`).
    Gcave,
    /// Truncation `min(sigma, z)`; drives the trimming algorithms.
    Tcave,
}

impl ConcaveKind {
    pub const ALL: [ConcaveKind; 8] = [
        ConcaveKind::Hcave,
        ConcaveKind::Acave,
        ConcaveKind::Bcave,
        ConcaveKind::Ccave,
        ConcaveKind::Dcave,
        ConcaveKind::Ecave,
        ConcaveKind::Gcave,
        ConcaveKind::Tcave,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConcaveKind::Hcave => "hcave",
            ConcaveKind::Acave => "acave",
            ConcaveKind::Bcave => "bcave",
            ConcaveKind::Ccave => "ccave",
            ConcaveKind::Dcave => "dcave",
            ConcaveKind::Ecave => "ecave",
            ConcaveKind::Gcave => "gcave",
            ConcaveKind::Tcave => "tcave",
        }
    }

    pub fn parse(name: &str) -> Result<ConcaveKind> {
        ConcaveKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                CocoError::Validation(format!(
                    "unknown concave component '{name}'; valid names: {}",
                    ConcaveKind::ALL
                        .iter()
                        .map(|k| k.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })
    }
}

impl std::fmt::Display for ConcaveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Default cap width for `ecave`: keeps the linear segment active only
/// near the origin. Any positive value keeps the origin weight bounded.
pub const ECAVE_DELTA_FACTOR: f64 = 0.25;

/// Default cap width for `gcave` with `0 < sigma < 1`, where the exact
/// formula has an unbounded derivative at the origin. The origin weight
/// grows as `delta^(sigma-1)`, so this is a compromise between fidelity
/// to the uncapped curve and a bounded weight.
pub const GCAVE_SMALL_SIGMA_DELTA: f64 = 1e-4;

/// A concave component together with its shape parameter(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcaveSpec {
    kind: ConcaveKind,
    sigma: f64,
    /// Cap width; present only for `ecave` and `gcave`.
    delta: Option<f64>,
}

impl ConcaveSpec {
    /// Builds a spec with the default `delta` where one is required:
    /// `0.25 * sigma` for `ecave`, `(sigma-1)/2` for `gcave` with
    /// `sigma >= 1` and `1e-4` for `gcave` with `sigma < 1`.
    pub fn new(kind: ConcaveKind, sigma: f64) -> Result<ConcaveSpec> {
        let delta = match kind {
            ConcaveKind::Ecave => Some(ECAVE_DELTA_FACTOR * sigma),
            ConcaveKind::Gcave => Some(if sigma >= 1.0 {
                (sigma - 1.0) / 2.0
            } else {
                GCAVE_SMALL_SIGMA_DELTA
            }),
            _ => None,
        };
        Self::build(kind, sigma, delta)
    }

    /// Builds a spec with an explicit `delta` (only `ecave` and `gcave`
    /// accept one). For `gcave` with `sigma >= 1` the cap is pinned to
    /// `(sigma-1)/2` and any other value is rejected.
    pub fn with_delta(kind: ConcaveKind, sigma: f64, delta: f64) -> Result<ConcaveSpec> {
        match kind {
            ConcaveKind::Ecave => Self::build(kind, sigma, Some(delta)),
            ConcaveKind::Gcave => {
                if sigma >= 1.0 && delta != (sigma - 1.0) / 2.0 {
                    return Err(CocoError::Validation(format!(
                        "gcave with sigma = {sigma} requires delta = (sigma-1)/2 = {}, got {delta}",
                        (sigma - 1.0) / 2.0
                    )));
                }
                Self::build(kind, sigma, Some(delta))
            }
            _ => Err(CocoError::Validation(format!(
                "{kind} takes no delta parameter"
            ))),
        }
    }

    fn build(kind: ConcaveKind, sigma: f64, delta: Option<f64>) -> Result<ConcaveSpec> {
        if !sigma.is_finite() {
            return Err(CocoError::Validation(format!(
                "{kind} sigma must be finite, got {sigma}"
            )));
        }
        match kind {
            ConcaveKind::Tcave => {
                if sigma < 0.0 {
                    return Err(CocoError::Validation(format!(
                        "tcave requires sigma >= 0, got {sigma}"
                    )));
                }
            }
            _ => {
                if sigma <= 0.0 {
                    return Err(CocoError::Validation(format!(
                        "{kind} requires sigma > 0, got {sigma}"
                    )));
                }
            }
        }
        if let Some(d) = delta {
            if !d.is_finite() || d < 0.0 {
                return Err(CocoError::Validation(format!(
                    "{kind} requires delta >= 0, got {d}"
                )));
            }
            // gcave with sigma = 1 pins delta to 0; everywhere else the cap
            // must be strictly positive to bound the origin weight.
            if d == 0.0 && !(kind == ConcaveKind::Gcave && sigma == 1.0) {
                return Err(CocoError::Validation(format!(
                    "{kind} requires delta > 0, got 0"
                )));
            }
        }
        Ok(ConcaveSpec { kind, sigma, delta })
    }

    pub fn kind(&self) -> ConcaveKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if z < 0.0 || z.is_nan() {
            return Err(CocoError::Domain(format!(
                "{} is defined for z >= 0, got z = {z}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Evaluates `g(z)` for `z >= 0`.
    pub fn eval(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let s = self.sigma;
        Ok(match self.kind {
            ConcaveKind::Hcave => {
                if z <= s * s / 2.0 {
                    z
                } else {
                    s * (2.0 * z).sqrt() - s * s / 2.0
                }
            }
            ConcaveKind::Acave => {
                if z <= s * s * std::f64::consts::PI.powi(2) / 2.0 {
                    // 1 - cos(x) written as 2 sin^2(x/2) to avoid cancellation
                    let x = (2.0 * z).sqrt() / s;
                    2.0 * s * s * (x / 2.0).sin().powi(2)
                } else {
                    2.0 * s * s
                }
            }
            ConcaveKind::Bcave => {
                if z <= s * s / 2.0 {
                    s * s / 6.0 * (1.0 - (1.0 - 2.0 * z / (s * s)).powi(3))
                } else {
                    s * s / 6.0
                }
            }
            ConcaveKind::Ccave => -s * s * (-z / (s * s)).exp_m1(),
            ConcaveKind::Dcave => {
                ((z).ln_1p() - (z * (-s).exp()).ln_1p()) / -(-s).exp_m1()
            }
            ConcaveKind::Ecave => {
                let d = self.delta.expect("ecave carries delta");
                let c = ecave_cap_slope(s, d);
                if z <= d {
                    c * z
                } else {
                    2.0 * (libm::erf((z / s).sqrt()) - libm::erf((d / s).sqrt())) + c * d
                }
            }
            ConcaveKind::Gcave => {
                let d = self.delta.expect("gcave carries delta");
                if z <= d {
                    gcave_cap_slope(s, d) * z
                } else {
                    ((z / (1.0 + z)).powf(s) - (d / (1.0 + d)).powf(s)) / s
                        + d.powf(s) / (1.0 + d).powf(s + 1.0)
                }
            }
            ConcaveKind::Tcave => s.min(z),
        })
    }

    /// Returns an element `v` of the subdifferential of `-g` at `z`.
    ///
    /// Always `v <= 0`. At points where the subdifferential is an
    /// interval the element kept is the one that retains the observation:
    /// `-1` at the `tcave` tie `z = sigma` (so the truncation loop and
    /// the fixed-threshold loop agree exactly) and the right limit at the
    /// `acave` origin.
    pub fn neg_subgradient(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let s = self.sigma;
        Ok(match self.kind {
            ConcaveKind::Hcave => {
                if z <= s * s / 2.0 {
                    -1.0
                } else {
                    -s / (2.0 * z).sqrt()
                }
            }
            ConcaveKind::Acave => {
                if z == 0.0 {
                    -1.0
                } else if z <= s * s * std::f64::consts::PI.powi(2) / 2.0 {
                    let r = (2.0 * z).sqrt();
                    -s * (r / s).sin() / r
                } else {
                    0.0
                }
            }
            ConcaveKind::Bcave => {
                if z <= s * s / 2.0 {
                    let t = 2.0 * z / (s * s) - 1.0;
                    -(t * t)
                } else {
                    0.0
                }
            }
            ConcaveKind::Ccave => -(-z / (s * s)).exp(),
            ConcaveKind::Dcave => -s.exp() / ((z + 1.0) * (z + s.exp())),
            ConcaveKind::Ecave => {
                let d = self.delta.expect("ecave carries delta");
                if z <= d {
                    -ecave_cap_slope(s, d)
                } else {
                    -2.0 * (-z / s).exp() / (std::f64::consts::PI * s * z).sqrt()
                }
            }
            ConcaveKind::Gcave => {
                let d = self.delta.expect("gcave carries delta");
                if z <= d {
                    -gcave_cap_slope(s, d)
                } else {
                    -z.powf(s - 1.0) / (1.0 + z).powf(s + 1.0)
                }
            }
            ConcaveKind::Tcave => {
                if z <= s {
                    -1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// Observation weight `-v` for `v` in the subdifferential of `-g(z)`.
    pub fn weight(&self, z: f64) -> Result<f64> {
        Ok(-self.neg_subgradient(z)?)
    }

    /// The largest weight the component can assign, attained at `z = 0`.
    pub fn weight_at_origin(&self) -> f64 {
        self.weight(0.0).expect("z = 0 is always in-domain")
    }

    /// Analytic supremum of `g`, or `None` for the unbounded `hcave`.
    pub fn upper_bound(&self) -> Option<f64> {
        let s = self.sigma;
        match self.kind {
            ConcaveKind::Hcave => None,
            ConcaveKind::Acave => Some(2.0 * s * s),
            ConcaveKind::Bcave => Some(s * s / 6.0),
            ConcaveKind::Ccave => Some(s * s),
            ConcaveKind::Dcave => Some(s / -(-s).exp_m1()),
            ConcaveKind::Ecave => {
                let d = self.delta.expect("ecave carries delta");
                Some(2.0 * (1.0 - libm::erf((d / s).sqrt())) + ecave_cap_slope(s, d) * d)
            }
            ConcaveKind::Gcave => {
                let d = self.delta.expect("gcave carries delta");
                Some(
                    (1.0 - (d / (1.0 + d)).powf(s)) / s + d.powf(s) / (1.0 + d).powf(s + 1.0),
                )
            }
            ConcaveKind::Tcave => Some(s),
        }
    }

    /// Interior breakpoints of `g` in `z`-space (where the formula switches
    /// pieces). Used by the diagnostics to stay off non-smooth points.
    pub fn knots(&self) -> Vec<f64> {
        let s = self.sigma;
        match self.kind {
            ConcaveKind::Hcave | ConcaveKind::Bcave => vec![s * s / 2.0],
            ConcaveKind::Acave => vec![s * s * std::f64::consts::PI.powi(2) / 2.0],
            ConcaveKind::Ccave | ConcaveKind::Dcave => vec![],
            ConcaveKind::Ecave | ConcaveKind::Gcave => {
                let d = self.delta.expect("delta present");
                if d > 0.0 {
                    vec![d]
                } else {
                    vec![]
                }
            }
            ConcaveKind::Tcave => vec![s],
        }
    }
}

/// Slope of the linear cap of `ecave` on `z <= delta`, chosen to splice
/// continuously into the erf arc.
fn ecave_cap_slope(sigma: f64, delta: f64) -> f64 {
    2.0 * (-delta / sigma).exp() / (std::f64::consts::PI * sigma * delta).sqrt()
}

/// Slope of the linear cap of `gcave` on `z <= delta`. For sigma = 1 the
/// cap degenerates (delta = 0) and the slope is the z -> 0 limit 1.
fn gcave_cap_slope(sigma: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        1.0
    } else {
        delta.powf(sigma - 1.0) / (1.0 + delta).powf(sigma + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(kind: ConcaveKind, sigma: f64) -> ConcaveSpec {
        ConcaveSpec::new(kind, sigma).unwrap()
    }

    #[test]
    fn tcave_truncates() {
        let g = spec(ConcaveKind::Tcave, 1.0);
        assert_eq!(g.eval(0.5).unwrap(), 0.5);
        assert_eq!(g.eval(2.0).unwrap(), 1.0);
        assert_eq!(g.neg_subgradient(2.0).unwrap(), 0.0);
        // tie at z = sigma keeps the observation
        assert_eq!(g.neg_subgradient(1.0).unwrap(), -1.0);
    }

    #[test]
    fn ccave_values() {
        let g = spec(ConcaveKind::Ccave, 1.0);
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        // 1 - exp(-1), thirty-digit reference 0.632120558828557678404476229839
        assert_abs_diff_eq!(g.eval(1.0).unwrap(), 0.632120558828557678, epsilon = 1e-15);
    }

    #[test]
    fn hcave_branches() {
        let g = spec(ConcaveKind::Hcave, 1.3);
        assert_eq!(g.eval(0.5).unwrap(), 0.5); // z <= sigma^2/2 = 0.845
        assert_abs_diff_eq!(g.eval(2.0).unwrap(), 1.755, epsilon = 1e-12);
        assert_eq!(g.neg_subgradient(0.5).unwrap(), -1.0);
        assert_abs_diff_eq!(g.neg_subgradient(2.0).unwrap(), -0.65, epsilon = 1e-12);
    }

    #[test]
    fn dcave_values() {
        let g = spec(ConcaveKind::Dcave, 1.0);
        assert_eq!(g.neg_subgradient(0.0).unwrap(), -1.0);
        let g = spec(ConcaveKind::Dcave, 0.5);
        assert_abs_diff_eq!(
            g.eval(2.0).unwrap(),
            0.773212771872570817917576608114,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            g.neg_subgradient(2.0).unwrap(),
            -0.150620920625868681271395051468,
            epsilon = 1e-14
        );
    }

    #[test]
    fn acave_values() {
        let g = spec(ConcaveKind::Acave, 0.9);
        assert_abs_diff_eq!(
            g.eval(1.0).unwrap(),
            0.810447181409203380048585401189,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            g.neg_subgradient(1.0).unwrap(),
            -0.636396006085031768641779543676,
            epsilon = 1e-14
        );
        assert_eq!(g.neg_subgradient(0.0).unwrap(), -1.0);
        assert_eq!(g.neg_subgradient(5.0).unwrap(), 0.0); // past the knot ~3.997
        assert_abs_diff_eq!(g.eval(5.0).unwrap(), 2.0 * 0.81, epsilon = 1e-14);
    }

    #[test]
    fn bcave_values() {
        let g = spec(ConcaveKind::Bcave, 4.7);
        assert_abs_diff_eq!(
            g.eval(3.0).unwrap(),
            2.25892696674229319498549187949,
            epsilon = 1e-13
        );
        assert_eq!(g.neg_subgradient(0.0).unwrap(), -1.0);
        assert_eq!(g.neg_subgradient(12.0).unwrap(), 0.0);
    }

    #[test]
    fn ecave_table_consistent_construction() {
        // ecave(1.5) with the default cap delta = 0.375
        let g = spec(ConcaveKind::Ecave, 1.5);
        assert_eq!(g.delta(), Some(0.375));
        assert_abs_diff_eq!(
            g.eval(0.2).unwrap(),
            0.234342021049451945091659721287,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            g.eval(2.0).unwrap(),
            1.19345066412213046630862975834,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            g.neg_subgradient(2.0).unwrap(),
            -0.171725631751686687637844089071,
            epsilon = 1e-14
        );
        // the cap slope and the arc derivative agree at delta
        let left = g.neg_subgradient(0.375).unwrap();
        let right = g.neg_subgradient(0.375 + 1e-12).unwrap();
        assert_abs_diff_eq!(left, right, epsilon = 1e-9);
    }

    #[test]
    fn gcave_values_and_pinned_delta() {
        let g = spec(ConcaveKind::Gcave, 1.5);
        assert_eq!(g.delta(), Some(0.25));
        assert_abs_diff_eq!(
            g.eval(2.0).unwrap(),
            0.374813065181210448484150270634,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            g.neg_subgradient(2.0).unwrap(),
            -0.0907218423253028925258253361002,
            epsilon = 1e-14
        );
        // explicit delta must match the pinned value when sigma >= 1
        assert!(ConcaveSpec::with_delta(ConcaveKind::Gcave, 1.5, 0.3).is_err());
        assert!(ConcaveSpec::with_delta(ConcaveKind::Gcave, 1.5, 0.25).is_ok());
        // sigma = 1 degenerates the cap; weight at origin is the limit 1
        let g1 = spec(ConcaveKind::Gcave, 1.0);
        assert_eq!(g1.delta(), Some(0.0));
        assert_eq!(g1.weight_at_origin(), 1.0);
        assert_abs_diff_eq!(g1.eval(1.0).unwrap(), 0.5, epsilon = 1e-15);
        // small sigma keeps a positive default cap and a large finite origin weight
        let gs = spec(ConcaveKind::Gcave, 0.5);
        assert_eq!(gs.delta(), Some(1e-4));
        assert_abs_diff_eq!(
            gs.weight_at_origin(),
            99.9850018747812746066682619803,
            epsilon = 1e-10
        );
    }

    #[test]
    fn validation_rules() {
        assert!(ConcaveSpec::new(ConcaveKind::Ccave, 0.0).is_err());
        assert!(ConcaveSpec::new(ConcaveKind::Ccave, -1.0).is_err());
        assert!(ConcaveSpec::new(ConcaveKind::Tcave, 0.0).is_ok());
        assert!(ConcaveSpec::with_delta(ConcaveKind::Ccave, 1.0, 0.1).is_err());
        assert!(ConcaveSpec::with_delta(ConcaveKind::Ecave, 1.0, 0.0).is_err());
        let g = spec(ConcaveKind::Ccave, 1.0);
        assert!(matches!(g.eval(-0.1), Err(CocoError::Domain(_))));
        assert!(matches!(g.neg_subgradient(-0.1), Err(CocoError::Domain(_))));
    }

    #[test]
    fn bounded_components_respect_supremum() {
        for kind in ConcaveKind::ALL {
            for sigma in [0.5, 1.0, 1.5, 4.7] {
                let g = spec(kind, sigma);
                if let Some(bound) = g.upper_bound() {
                    let mut z = 0.0;
                    while z <= 50.0 {
                        assert!(
                            g.eval(z).unwrap() <= bound + 1e-12,
                            "{kind}({sigma}) exceeds its supremum at z = {z}"
                        );
                        z += 0.01;
                    }
                }
            }
        }
    }

    #[test]
    fn weights_nonincreasing_and_bounded() {
        for kind in ConcaveKind::ALL {
            for sigma in [0.5, 0.9, 1.0, 1.5, 4.7] {
                let g = spec(kind, sigma);
                let w_max = g.weight_at_origin();
                let mut prev = f64::INFINITY;
                let mut z = 0.0;
                while z <= 50.0 {
                    let w = g.weight(z).unwrap();
                    assert!(
                        w <= prev + 1e-12,
                        "{kind}({sigma}) weight increases at z = {z}: {w} > {prev}"
                    );
                    assert!((0.0..=w_max + 1e-12).contains(&w));
                    prev = w;
                    z += 0.01;
                }
            }
        }
    }

    #[test]
    fn eval_matches_integrated_weight() {
        // g(b) - g(a) must equal the integral of the weight over [a, b];
        // this pins the ecave normalization to its subdifferential table.
        for kind in ConcaveKind::ALL {
            // gcave below sigma = 1 keeps a microscopic cap; its weight is
            // integrable but too steep at the cap for fixed-step Simpson,
            // so that branch is checked by finite differences instead
            let sigmas: &[f64] = if kind == ConcaveKind::Gcave {
                &[1.5, 2.0]
            } else {
                &[0.9, 1.5]
            };
            for &sigma in sigmas {
                let g = spec(kind, sigma);
                // integrate piecewise between knots so Simpson sees smooth arcs
                let mut cuts = vec![0.0_f64];
                cuts.extend(g.knots().into_iter().filter(|k| *k > 0.0 && *k < 8.0));
                cuts.push(8.0);
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut integral = 0.0;
                for pair in cuts.windows(2) {
                    // nudge off the knot itself; the weight may jump there
                    integral +=
                        simpson(|z| g.weight(z).unwrap(), pair[0] + 1e-9, pair[1] - 1e-9, 20_000);
                }
                let direct = g.eval(8.0).unwrap() - g.eval(0.0).unwrap();
                assert_abs_diff_eq!(integral, direct, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn gcave_small_sigma_derivative_consistency() {
        let g = spec(ConcaveKind::Gcave, 0.9);
        for z in [0.01_f64, 0.5, 2.0, 6.0] {
            let h = 1e-7 * z.max(1.0);
            let fd = (g.eval(z + h).unwrap() - g.eval(z - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(fd, g.weight(z).unwrap(), epsilon = 1e-6);
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = if n % 2 == 0 { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }
}
