//! Numerical verification utilities: the composite-concavity inequality,
//! Fisher consistency of classification composites, the truncation
//! conjugate, and exportable weight / risk-aversion curves.

use crate::error::{CocoError, Result};
use crate::loss::{CompositeLoss, ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec};

/// Central finite-difference step. Second differences at this step keep
/// truncation and cancellation errors balanced in double precision.
pub const FD_STEP: f64 = 1e-5;
/// Exclusion margin around non-smooth points, in the units of `u`.
pub const KNOT_MARGIN: f64 = 1e-4;
/// Points where `|s'(u)|` falls below this are excluded (the concavity
/// inequality divides by `s'`).
const MIN_SLOPE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ConcavityPoint {
    pub u: f64,
    /// `s''(u)/s'(u) * Gamma'(u)` (the majorizing side).
    pub lhs: f64,
    /// `Gamma''(u)`.
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct ConcavityReport {
    /// Largest `Gamma'' - (s''/s') Gamma'` over the grid; concavity of
    /// the underlying `g` keeps this nonpositive up to roundoff.
    pub max_violation: f64,
    pub points: Vec<ConcavityPoint>,
}

impl ConcavityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Checks the composite-concavity inequality on a grid via central
/// finite differences of the black-box composite, skipping non-smooth
/// points and near-zero slopes of `s`.
pub fn check_concavity(loss: &CompositeLoss, u_grid: &[f64]) -> Result<ConcavityReport> {
    let s = |u: f64| loss.convex.eval(u, None).unwrap();
    let g = move |z: f64| loss.concave.eval(z).unwrap();
    let knots_z = loss.concave.knots();
    let knots_u = loss.convex.knots();
    check_concavity_fn(&g, &s, u_grid, &knots_z, &knots_u)
}

/// Same check for arbitrary components; lets tests inject a non-concave
/// control `g`.
pub fn check_concavity_fn(
    g: &dyn Fn(f64) -> f64,
    s: &dyn Fn(f64) -> f64,
    u_grid: &[f64],
    knots_z: &[f64],
    knots_u: &[f64],
) -> Result<ConcavityReport> {
    let h = FD_STEP;
    let mut points = Vec::new();
    let mut max_violation = f64::NEG_INFINITY;

    for &u in u_grid {
        let s_prime = (s(u + h) - s(u - h)) / (2.0 * h);
        if s_prime.abs() < MIN_SLOPE {
            continue;
        }
        // off the convex component's own kinks
        if knots_u.iter().any(|&k| (u - k).abs() < KNOT_MARGIN) {
            continue;
        }
        // off preimages of the concave component's kinks: first-order
        // mapping of the u-margin through s
        let z = s(u);
        let z_margin = KNOT_MARGIN * s_prime.abs().max(1.0);
        if knots_z.iter().any(|&k| (z - k).abs() < z_margin) {
            continue;
        }
        if z < 0.0 {
            continue;
        }

        let gamma = |v: f64| g(s(v));
        let gamma_prime = (gamma(u + h) - gamma(u - h)) / (2.0 * h);
        let gamma_second = (gamma(u + h) - 2.0 * gamma(u) + gamma(u - h)) / (h * h);
        let s_second = (s(u + h) - 2.0 * s(u) + s(u - h)) / (h * h);

        let lhs = s_second / s_prime * gamma_prime;
        let rhs = gamma_second;
        max_violation = max_violation.max(rhs - lhs);
        points.push(ConcavityPoint { u, lhs, rhs });
    }

    if points.is_empty() {
        return Err(CocoError::Validation(
            "concavity grid is empty after knot and zero-slope exclusion".into(),
        ));
    }
    Ok(ConcavityReport {
        max_violation,
        points,
    })
}

#[derive(Debug, Clone)]
pub struct FisherPoint {
    pub p: f64,
    pub argmin: f64,
    pub sign_matches: bool,
}

#[derive(Debug, Clone)]
pub struct FisherReport {
    pub all_signs_match: bool,
    pub points: Vec<FisherPoint>,
    /// Whether the consistency theorem's hypotheses cover this composite;
    /// when `false` the report is informational only.
    pub covered: bool,
}

/// Whether the Fisher-consistency theorem covers the composite: a
/// positive derivative of `g` at `s(0)`, or (for one-sided losses) a
/// nonincreasing `s` that is flat past the margin. The truncation
/// component paired with the non-monotone quadratic margin loss is the
/// flagged exception.
pub fn fisher_covered(loss: &CompositeLoss) -> bool {
    match (loss.concave.kind(), loss.convex.kind()) {
        (ConcaveKind::Tcave, ConvexKind::GaussianC) => false,
        (ConcaveKind::Tcave, ConvexKind::Hinge | ConvexKind::Binomial) => {
            // covered through the one-sided route only if g is smooth at
            // s(0) = 1 resp. log 2 with positive slope
            let z0 = loss.convex.eval(0.0, None).unwrap();
            z0 < loss.concave.sigma()
        }
        _ => true,
    }
}

/// Minimizes `V(w) = p Gamma(w) + (1-p) Gamma(-w)` over a dense grid on
/// `[-10, 10]` for each class probability and verifies that the
/// minimizer's sign matches `sign(p - 1/2)`. Entries at `p = 0.5` are
/// skipped (the sign is undefined there).
pub fn check_fisher(loss: &CompositeLoss, p_grid: &[f64]) -> Result<FisherReport> {
    loss.check_task(crate::data::TaskKind::Classification)?;
    let gamma = |w: f64| loss.gamma(w, None);
    let grid_n = 4001;
    let mut points = Vec::new();
    let mut all = true;
    for &p in p_grid {
        if !(0.0 < p && p < 1.0) {
            return Err(CocoError::Validation(format!(
                "class probability must lie in (0, 1), got {p}"
            )));
        }
        if p == 0.5 {
            continue;
        }
        let mut best_w = 0.0;
        let mut best_v = f64::INFINITY;
        for i in 0..grid_n {
            let w = -10.0 + 20.0 * i as f64 / (grid_n - 1) as f64;
            let v = p * gamma(w)? + (1.0 - p) * gamma(-w)?;
            if v < best_v {
                best_v = v;
                best_w = w;
            }
        }
        let matches = best_w.signum() == (p - 0.5).signum() && best_w != 0.0;
        all &= matches;
        points.push(FisherPoint {
            p,
            argmin: best_w,
            sign_matches: matches,
        });
    }
    Ok(FisherReport {
        all_signs_match: all,
        points,
        covered: fisher_covered(loss),
    })
}

/// Convex conjugate of the negated truncation component
/// `g(z) = min(sigma, z)`: finite and equal to `sigma (v + 1)` exactly
/// on `[-1, 0]`, infinite elsewhere.
pub fn tcave_conjugate(v: f64, sigma: f64) -> f64 {
    if (-1.0..=0.0).contains(&v) {
        sigma * (v + 1.0)
    } else {
        f64::INFINITY
    }
}

/// Biconjugate of the truncation component at `z`: the infimum of
/// `z(-v) + phi(v)` over the conjugate's domain, together with its
/// optimizer. The objective is linear in `v`, so the endpoints decide.
pub fn tcave_biconjugate(z: f64, sigma: f64) -> (f64, f64) {
    let at = |v: f64| z * (-v) + tcave_conjugate(v, sigma);
    let lo = at(-1.0);
    let hi = at(0.0);
    // ties keep the observation (v = -1), matching the truncation loop
    if lo <= hi {
        (lo, -1.0)
    } else {
        (hi, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
}

/// Tabulates the observation weight `-d(-g)/dz` over a `z`-grid.
pub fn weight_curve(g: &ConcaveSpec, z_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    z_grid
        .iter()
        .map(|&z| {
            Ok(CurvePoint {
                x: z,
                value: g.weight(z)?,
            })
        })
        .collect()
}

/// Tabulates the absolute risk aversion `-s''(u)/s'(u)` by central
/// finite differences, skipping near-zero slopes.
pub fn ara_curve(s: &ConvexSpec, u_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    let h = FD_STEP;
    let mut out = Vec::new();
    for &u in u_grid {
        let sp = (s.eval(u + h, None)? - s.eval(u - h, None)?) / (2.0 * h);
        if sp.abs() < MIN_SLOPE {
            continue;
        }
        let spp =
            (s.eval(u + h, None)? - 2.0 * s.eval(u, None)? + s.eval(u - h, None)?) / (h * h);
        out.push(CurvePoint {
            x: u,
            value: -spp / sp,
        });
    }
    Ok(out)
}

/// Evenly spaced grid helper.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec};
    use approx::assert_abs_diff_eq;

    fn composite(ck: ConcaveKind, sigma: f64, vk: ConvexKind) -> CompositeLoss {
        CompositeLoss::new(
            ConcaveSpec::new(ck, sigma).unwrap(),
            ConvexSpec::new(vk).unwrap(),
        )
    }

    #[test]
    fn ccave_gaussian_concavity() {
        let loss = composite(ConcaveKind::Ccave, 1.0, ConvexKind::Gaussian);
        let grid: Vec<f64> = linspace(-5.0, 5.0, 501)
            .into_iter()
            .filter(|u| u.abs() > 0.05)
            .collect();
        let report = check_concavity(&loss, &grid).unwrap();
        assert!(
            report.passes(1e-6),
            "max violation {}",
            report.max_violation
        );
    }

    #[test]
    fn huber_equality_below_sigma() {
        // the composite coincides with the quadratic below sigma, so both
        // sides of the inequality agree there
        let loss = composite(ConcaveKind::Hcave, 1.3, ConvexKind::Gaussian);
        let grid: Vec<f64> = linspace(0.1, 1.2, 40).to_vec();
        let report = check_concavity(&loss, &grid).unwrap();
        for pt in &report.points {
            assert_abs_diff_eq!(pt.lhs, pt.rhs, epsilon = 1e-6);
        }
    }

    #[test]
    fn non_concave_control_is_detected() {
        let g = |z: f64| z * z;
        let s = |u: f64| u * u / 2.0;
        let grid: Vec<f64> = linspace(0.5, 3.0, 50).to_vec();
        let report = check_concavity_fn(&g, &s, &grid, &[], &[]).unwrap();
        assert!(report.max_violation > 1e-3);
    }

    #[test]
    fn empty_grid_errors() {
        let loss = composite(ConcaveKind::Ccave, 1.0, ConvexKind::Gaussian);
        assert!(matches!(
            check_concavity(&loss, &[0.0]), // s'(0) = 0, excluded
            Err(CocoError::Validation(_))
        ));
    }

    #[test]
    fn fisher_signs() {
        let loss = composite(ConcaveKind::Ccave, 1.0, ConvexKind::GaussianC);
        let report = check_fisher(&loss, &[0.1, 0.3, 0.7, 0.9]).unwrap();
        assert!(report.all_signs_match);
        assert!(report.covered);
        for pt in &report.points {
            if pt.p > 0.5 {
                assert!(pt.argmin > 0.0);
            } else {
                assert!(pt.argmin < 0.0);
            }
        }
        // p = 0.5 is skipped, not evaluated
        let report = check_fisher(&loss, &[0.5]).unwrap();
        assert!(report.points.is_empty());
    }

    #[test]
    fn tcave_gaussianc_flagged_not_covered() {
        let loss = composite(ConcaveKind::Tcave, 1.0, ConvexKind::GaussianC);
        assert!(!fisher_covered(&loss));
        // the numerical check still runs and is reported
        let report = check_fisher(&loss, &[0.7]).unwrap();
        assert!(!report.covered);
    }

    #[test]
    fn conjugate_values() {
        assert_eq!(tcave_conjugate(-1.0, 2.0), 0.0);
        assert_eq!(tcave_conjugate(-0.5, 2.0), 1.0);
        assert_eq!(tcave_conjugate(0.5, 2.0), f64::INFINITY);
        assert_eq!(tcave_conjugate(-1.5, 2.0), f64::INFINITY);
    }

    #[test]
    fn biconjugate_recovers_truncation() {
        for sigma in [0.5, 1.0, 2.0] {
            for i in 0..=100 {
                let z = 5.0 * i as f64 / 100.0;
                let (value, v_opt) = tcave_biconjugate(z, sigma);
                assert!(
                    (value - z.min(sigma)).abs() <= 1e-12,
                    "biconjugate mismatch at z = {z}, sigma = {sigma}"
                );
                let indicator = if z <= sigma { -1.0 } else { 0.0 };
                assert_eq!(v_opt, indicator);
            }
        }
    }

    #[test]
    fn weight_curve_step_function() {
        let g = ConcaveSpec::new(ConcaveKind::Tcave, 1.0).unwrap();
        let grid = [0.0, 0.5, 0.99, 1.01, 3.0];
        let curve = weight_curve(&g, &grid).unwrap();
        assert_eq!(
            curve.iter().map(|p| p.value).collect::<Vec<_>>(),
            vec![1.0, 1.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn gaussian_ara_is_reciprocal() {
        let s = ConvexSpec::new(ConvexKind::Gaussian).unwrap();
        let curve = ara_curve(&s, &[2.0]).unwrap();
        assert_abs_diff_eq!(curve[0].value, -0.5, epsilon = 1e-5);
    }
}
