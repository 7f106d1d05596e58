//! The outer reweighting loops.
//!
//! Three variants share one skeleton: compute the margins and the
//! convex-loss values `z_i` at the current coefficients, derive dual
//! weights `v_i <= 0`, and solve the weighted penalized convex problem
//! with observation weights `-v_i`, warm-started at the current point.
//!
//! - conjugation weights: `v_i` in the subdifferential of `-g(z_i)`;
//! - fixed threshold: `v_i = -1 iff z_i <= sigma` (truncation);
//! - fixed count: `v_i = -1` on the `h` smallest `z_i` (trimming,
//!   ties broken by the lowest row index).
//!
//! Because each weight vector minimizes the conjugate surrogate at the
//! current point and the inner solver never returns a worse point than
//! its warm start, the tracked objective is nonincreasing.

use crate::data::Dataset;
use crate::error::{CocoError, Result};
use crate::loss::CompositeLoss;
use crate::penalty::PenaltySpec;
use crate::solver::{solve_weighted, InnerProblem, InnerSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Dual weights from the concave component's subdifferential.
    Coco,
    /// Hard truncation at the concave component's sigma.
    Cocots,
    /// Hard trimming to a fixed count of smallest convex losses.
    Cocotv,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Coco => "coco",
            Algorithm::Cocots => "cocots",
            Algorithm::Cocotv => "cocotv",
        }
    }

    pub fn parse(name: &str) -> Result<Algorithm> {
        match name {
            "coco" => Ok(Algorithm::Coco),
            "cocots" => Ok(Algorithm::Cocots),
            "cocotv" => Ok(Algorithm::Cocotv),
            _ => Err(CocoError::Validation(format!(
                "unknown algorithm '{name}'; valid algorithms: coco, cocots, cocotv"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Starting point of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Zeros,
    /// One unweighted inner solve (plain least squares / GLM / hinge fit
    /// with the same penalty) started from zero.
    LeastSquaresFit,
    User(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub algorithm: Algorithm,
    /// Number of observations kept per iteration; required by the
    /// trimming variant and rejected by the others. Theory suggests
    /// `(n+p+1)/2 <= h <= n-p-1`, but any `1 <= h <= n` is accepted.
    pub trim_h: Option<usize>,
    /// Relative objective-change stopping rule for the outer loop.
    pub outer_tol: f64,
    pub max_outer: usize,
    pub init: Init,
    pub inner: InnerSettings,
    /// Standardize predictors to unit variance before fitting (the
    /// penalty then applies on the standardized scale, and the reported
    /// objective trace is in that parametrization). `None` picks the
    /// default: on for penalized fits, off when `lambda = 0`.
    pub standardize: Option<bool>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            algorithm: Algorithm::Coco,
            trim_h: None,
            outer_tol: 1e-6,
            max_outer: 200,
            init: Init::Zeros,
            inner: InnerSettings::default(),
            standardize: None,
        }
    }
}

impl FitConfig {
    pub fn coco() -> FitConfig {
        FitConfig::default()
    }

    pub fn cocots() -> FitConfig {
        FitConfig {
            algorithm: Algorithm::Cocots,
            ..FitConfig::default()
        }
    }

    pub fn cocotv(h: usize) -> FitConfig {
        FitConfig {
            algorithm: Algorithm::Cocotv,
            trim_h: Some(h),
            ..FitConfig::default()
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.outer_tol > 0.0) {
            return Err(CocoError::Validation(format!(
                "outer_tol must be positive, got {}",
                self.outer_tol
            )));
        }
        if self.max_outer == 0 {
            return Err(CocoError::Validation("max_outer must be >= 1".into()));
        }
        match self.algorithm {
            Algorithm::Cocotv => match self.trim_h {
                None => {
                    return Err(CocoError::Validation(
                        "the trimming algorithm requires trim_h".into(),
                    ))
                }
                Some(h) if h == 0 || h > n => {
                    return Err(CocoError::Validation(format!(
                        "trim_h must lie in [1, n] = [1, {n}], got {h}"
                    )))
                }
                _ => {}
            },
            _ => {
                if self.trim_h.is_some() {
                    return Err(CocoError::Validation(format!(
                        "trim_h applies only to the trimming algorithm, not {}",
                        self.algorithm
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of a fit, in the coordinates of the original predictors.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta: Vec<f64>,
    /// Final dual weights, each in `[-w_max, 0]`.
    pub dual_v: Vec<f64>,
    /// Objective values `F(beta_k)`, one per outer iterate including the
    /// initial point. When the fit is standardized the values refer to
    /// that parametrization.
    pub objective_trace: Vec<f64>,
    pub outer_iters: usize,
    pub converged: bool,
    /// Convex-loss values at the solution.
    pub z: Vec<f64>,
    /// Margins at the solution.
    pub u: Vec<f64>,
    /// Set when a piecewise inner solve hit its iteration cap.
    pub inner_warning: bool,
}

/// Penalized composite objective
/// `F(beta) = (1/n) sum_i g(s(u_i(beta))) + Lambda(beta)`.
///
/// Exponential-family losses can produce negative `z`; `g` is extended
/// linearly there (see [`CompositeLoss::eval_extended`]).
pub fn objective(
    beta: &[f64],
    data: &Dataset,
    loss: &CompositeLoss,
    penalty: &PenaltySpec,
) -> Result<f64> {
    let z = convex_losses(data, loss, beta)?;
    let mut acc = 0.0;
    for &zi in &z {
        acc += loss.eval_extended(zi)?;
    }
    Ok(acc / data.n() as f64 + penalty.eval_beta(beta, data.has_intercept()))
}

/// The classical M-estimation weight for a Gaussian-composite loss:
/// `Gamma'(u)/u` away from zero and `Gamma''(0)` at zero, which equals
/// the dual weight `-v` evaluated at `z = u^2/2`.
pub fn irwls_weight(loss: &CompositeLoss, u: f64) -> Result<f64> {
    if loss.convex.kind() != crate::loss::ConvexKind::Gaussian {
        return Err(CocoError::Validation(
            "the M-estimation weight identity applies to the Gaussian convex component".into(),
        ));
    }
    Ok(-loss.neg_subgradient_extended(u * u / 2.0)?)
}

fn convex_losses(data: &Dataset, loss: &CompositeLoss, beta: &[f64]) -> Result<Vec<f64>> {
    let u = data.margins(beta)?;
    let pass_y = data.task().passes_response_to_loss();
    let mut z = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let y = if pass_y { Some(data.y()[i]) } else { None };
        z.push(loss.convex.eval(u[i], y)?);
    }
    Ok(z)
}

/// Indices of the `h` smallest values, ties broken by the lowest index.
fn smallest_h(z: &[f64], h: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap().then(a.cmp(&b)));
    order.truncate(h);
    order
}

struct TracedObjective<'a> {
    data: &'a Dataset,
    loss: &'a CompositeLoss,
    penalty: &'a PenaltySpec,
    algorithm: Algorithm,
    trim_h: usize,
}

impl TracedObjective<'_> {
    /// The objective each algorithm actually descends on: the composite
    /// loss for the conjugation weights, the truncated loss for the
    /// fixed threshold, and the h-smallest trimmed loss for trimming.
    fn eval(&self, beta: &[f64]) -> Result<f64> {
        let z = convex_losses(self.data, self.loss, beta)?;
        let n = self.data.n() as f64;
        let pen = self.penalty.eval_beta(beta, self.data.has_intercept());
        match self.algorithm {
            Algorithm::Coco => {
                let mut acc = 0.0;
                for &zi in &z {
                    acc += self.loss.eval_extended(zi)?;
                }
                Ok(acc / n + pen)
            }
            Algorithm::Cocots => {
                let sigma = self.loss.concave.sigma();
                Ok(z.iter().map(|&zi| zi.min(sigma)).sum::<f64>() / n + pen)
            }
            Algorithm::Cocotv => {
                let kept = smallest_h(&z, self.trim_h);
                Ok(kept.iter().map(|&i| z[i]).sum::<f64>() / n + pen)
            }
        }
    }

    fn dual_weights(&self, z: &[f64]) -> Result<Vec<f64>> {
        match self.algorithm {
            Algorithm::Coco => z
                .iter()
                .map(|&zi| self.loss.neg_subgradient_extended(zi))
                .collect(),
            Algorithm::Cocots => {
                let sigma = self.loss.concave.sigma();
                Ok(z.iter()
                    .map(|&zi| if zi <= sigma { -1.0 } else { 0.0 })
                    .collect())
            }
            Algorithm::Cocotv => {
                let mut v = vec![0.0; z.len()];
                for i in smallest_h(z, self.trim_h) {
                    v[i] = -1.0;
                }
                Ok(v)
            }
        }
    }
}

/// Runs the configured outer loop on `data`.
pub fn fit(
    data: &Dataset,
    loss: &CompositeLoss,
    penalty: &PenaltySpec,
    config: &FitConfig,
) -> Result<FitResult> {
    loss.check_task(data.task())?;
    config.validate(data.n())?;
    if data.n() < 2 {
        return Err(CocoError::Degenerate(format!(
            "need at least two observations, got {}",
            data.n()
        )));
    }

    let standardize = config
        .standardize
        .unwrap_or(penalty.lambda() > 0.0 && data.p() > 0);
    if !standardize {
        return fit_loop(data, loss, penalty, config);
    }

    let scaling = Scaling::from_dataset(data);
    let std_data = scaling.apply(data)?;
    let std_config = match &config.init {
        Init::User(beta) => {
            let mut cfg = config.clone();
            cfg.init = Init::User(scaling.to_standardized(beta));
            cfg
        }
        _ => config.clone(),
    };
    let mut result = fit_loop(&std_data, loss, penalty, &std_config)?;
    result.beta = scaling.to_original(&result.beta);
    Ok(result)
}

fn fit_loop(
    data: &Dataset,
    loss: &CompositeLoss,
    penalty: &PenaltySpec,
    config: &FitConfig,
) -> Result<FitResult> {
    let traced = TracedObjective {
        data,
        loss,
        penalty,
        algorithm: config.algorithm,
        trim_h: config.trim_h.unwrap_or(0),
    };

    let mut beta = match &config.init {
        Init::Zeros => vec![0.0; data.n_coefs()],
        Init::User(b) => {
            if b.len() != data.n_coefs() {
                return Err(CocoError::Validation(format!(
                    "user init has length {}, expected {}",
                    b.len(),
                    data.n_coefs()
                )));
            }
            b.clone()
        }
        Init::LeastSquaresFit => {
            let weights = vec![1.0; data.n()];
            let zeros = vec![0.0; data.n_coefs()];
            let problem = InnerProblem {
                data,
                weights: &weights,
                convex: &loss.convex,
                penalty,
                warm_start: &zeros,
                settings: config.inner,
            };
            solve_weighted(&problem)?.beta
        }
    };

    let mut trace = vec![traced.eval(&beta)?];
    let mut converged = false;
    let mut inner_warning = false;
    let mut outer_iters = 0;

    for k in 1..=config.max_outer {
        let z = convex_losses(data, loss, &beta)?;
        let v = traced.dual_weights(&z)?;
        let weights: Vec<f64> = v.iter().map(|vi| -vi).collect();
        if weights.iter().all(|w| *w == 0.0) {
            return Err(CocoError::DegenerateTrim { iteration: k });
        }
        let problem = InnerProblem {
            data,
            weights: &weights,
            convex: &loss.convex,
            penalty,
            warm_start: &beta,
            settings: config.inner,
        };
        let solution = solve_weighted(&problem).map_err(|e| match e {
            CocoError::Convergence { message, trace: t } => CocoError::Convergence {
                message: format!("outer iteration {k}: {message}"),
                trace: t,
            },
            other => other,
        })?;
        inner_warning |= !solution.converged;
        beta = solution.beta;
        outer_iters = k;

        let f_new = traced.eval(&beta)?;
        let f_prev = *trace.last().unwrap();
        trace.push(f_new);
        if (f_prev - f_new).abs() / (1.0 + f_prev.abs()) < config.outer_tol {
            converged = true;
            break;
        }
    }

    let u = data.margins(&beta)?;
    let z = convex_losses(data, loss, &beta)?;
    let dual_v = traced.dual_weights(&z)?;

    Ok(FitResult {
        beta,
        dual_v,
        objective_trace: trace,
        outer_iters,
        converged,
        z,
        u,
        inner_warning,
    })
}

/// Column scaling to unit variance (and the intercept-adjusting
/// back-transform). Centering applies only when the model carries an
/// intercept; constant columns keep scale one.
struct Scaling {
    means: Vec<f64>,
    scales: Vec<f64>,
    intercept: bool,
}

impl Scaling {
    fn from_dataset(data: &Dataset) -> Scaling {
        let n = data.n() as f64;
        let p = data.p();
        let intercept = data.has_intercept();
        let mut means = vec![0.0; p];
        let mut scales = vec![1.0; p];
        for j in 0..p {
            let mean = data.column(j).sum::<f64>() / n;
            let center = if intercept { mean } else { 0.0 };
            let var = data
                .column(j)
                .map(|x| (x - center) * (x - center))
                .sum::<f64>()
                / n;
            means[j] = center;
            scales[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Scaling {
            means,
            scales,
            intercept,
        }
    }

    fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let n = data.n();
        let p = data.p();
        let mut x = Vec::with_capacity(n * p);
        for i in 0..n {
            let row = data.row(i);
            for j in 0..p {
                x.push((row[j] - self.means[j]) / self.scales[j]);
            }
        }
        if data.has_intercept() {
            Dataset::new(x, n, p, data.y().to_vec(), data.task())
        } else {
            Dataset::without_intercept(x, n, p, data.y().to_vec(), data.task())
        }
    }

    fn to_standardized(&self, beta: &[f64]) -> Vec<f64> {
        let offset = usize::from(self.intercept);
        let mut out = beta.to_vec();
        for j in 0..self.scales.len() {
            out[offset + j] = beta[offset + j] * self.scales[j];
        }
        if self.intercept {
            let shift: f64 = (0..self.scales.len())
                .map(|j| beta[offset + j] * self.means[j])
                .sum();
            out[0] = beta[0] + shift;
        }
        out
    }

    fn to_original(&self, beta: &[f64]) -> Vec<f64> {
        let offset = usize::from(self.intercept);
        let mut out = beta.to_vec();
        for j in 0..self.scales.len() {
            out[offset + j] = beta[offset + j] / self.scales[j];
        }
        if self.intercept {
            let shift: f64 = (0..self.scales.len())
                .map(|j| out[offset + j] * self.means[j])
                .sum();
            out[0] = beta[0] - shift;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec};
    use crate::TaskKind;
    use approx::assert_abs_diff_eq;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    fn gaussian_loss(kind: ConcaveKind, sigma: f64) -> CompositeLoss {
        CompositeLoss::new(
            ConcaveSpec::new(kind, sigma).unwrap(),
            ConvexSpec::new(ConvexKind::Gaussian).unwrap(),
        )
    }

    #[test]
    fn large_sigma_recovers_least_squares() {
        // weights approach one as sigma grows, so the fit approaches
        // unpenalized least squares
        let mut state = 5_u64;
        let n = 30;
        let p = 3;
        let x: Vec<f64> = (0..n * p).map(|_| 2.0 * lcg(&mut state) - 1.0).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                1.0 + x[i * p] - 0.5 * x[i * p + 1] + 0.2 * (lcg(&mut state) - 0.5)
            })
            .collect();
        let data = Dataset::new(x.clone(), n, p, y.clone(), TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Ccave, 1e4);
        let pen = PenaltySpec::none();
        let mut config = FitConfig::coco();
        config.init = Init::LeastSquaresFit;
        config.inner.cd_tol = 1e-13;
        let result = fit(&data, &loss, &pen, &config).unwrap();
        let ls = crate::solver::solve_weighted(&InnerProblem {
            data: &data,
            weights: &vec![1.0; n],
            convex: &loss.convex,
            penalty: &pen,
            warm_start: &vec![0.0; p + 1],
            settings: config.inner,
        })
        .unwrap()
        .beta;
        for (a, b) in result.beta.iter().zip(&ls) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-4);
        }
    }

    #[test]
    fn truncation_with_huge_sigma_keeps_everything() {
        let mut state = 11_u64;
        let n = 20;
        let x: Vec<f64> = (0..n).map(|_| 2.0 * lcg(&mut state) - 1.0).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.7 * x[i] + lcg(&mut state)).collect();
        let data = Dataset::new(x, n, 1, y, TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Tcave, 1e9);
        let pen = PenaltySpec::none();
        let mut config = FitConfig::cocots();
        config.init = Init::LeastSquaresFit;
        let result = fit(&data, &loss, &pen, &config).unwrap();
        assert!(result.dual_v.iter().all(|&v| v == -1.0));
        // identical to the unweighted fit
        let ls = crate::solver::solve_weighted(&InnerProblem {
            data: &data,
            weights: &vec![1.0; n],
            convex: &loss.convex,
            penalty: &pen,
            warm_start: &vec![0.0; 2],
            settings: config.inner,
        })
        .unwrap()
        .beta;
        for (a, b) in result.beta.iter().zip(&ls) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn objective_matches_component_chain() {
        let mut state = 23_u64;
        let n = 5;
        let p = 2;
        let x: Vec<f64> = (0..n * p).map(|_| 2.0 * lcg(&mut state) - 1.0).collect();
        let y: Vec<f64> = (0..n).map(|_| 3.0 * lcg(&mut state)).collect();
        let data = Dataset::new(x, n, p, y, TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Dcave, 0.8);
        let pen = PenaltySpec::scad(0.3, 0.7).unwrap();
        let beta = vec![0.3, -1.1, 0.4];
        let ours = objective(&beta, &data, &loss, &pen).unwrap();
        // recompute by chaining the public component operations
        let u = data.margins(&beta).unwrap();
        let mut acc = 0.0;
        for &ui in &u {
            let z = loss.convex.eval(ui, None).unwrap();
            acc += loss.concave.eval(z).unwrap();
        }
        let expected = acc / n as f64 + pen.eval_beta(&beta, true);
        assert_abs_diff_eq!(ours, expected, epsilon = 1e-14);
    }

    #[test]
    fn objective_zero_at_truth_on_noiseless_data() {
        let x = vec![0.1, 0.9, -0.7, 0.4, 1.3, -0.2];
        let beta_true = vec![0.5, 2.0];
        let y: Vec<f64> = x.iter().map(|&v| 0.5 + 2.0 * v).collect();
        let data = Dataset::new(x, 6, 1, y, TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Ccave, 1.5);
        assert_eq!(
            objective(&beta_true, &data, &loss, &PenaltySpec::none()).unwrap(),
            0.0
        );
    }

    #[test]
    fn irwls_weight_examples() {
        let loss = gaussian_loss(ConcaveKind::Ccave, 1.0);
        assert_abs_diff_eq!(irwls_weight(&loss, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        let loss = gaussian_loss(ConcaveKind::Hcave, 1.3);
        assert_abs_diff_eq!(irwls_weight(&loss, 2.0).unwrap(), 0.65, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        let data =
            Dataset::new(vec![1.0, 2.0], 2, 1, vec![0.0, 1.0], TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Ccave, 1.0);
        let pen = PenaltySpec::none();
        // trimming without h
        let mut config = FitConfig::default();
        config.algorithm = Algorithm::Cocotv;
        assert!(matches!(
            fit(&data, &loss, &pen, &config),
            Err(CocoError::Validation(_))
        ));
        // h on a non-trimming algorithm
        let mut config = FitConfig::default();
        config.trim_h = Some(1);
        assert!(fit(&data, &loss, &pen, &config).is_err());
        // task mismatch
        let hinge = CompositeLoss::new(
            ConcaveSpec::new(ConcaveKind::Tcave, 1.0).unwrap(),
            ConvexSpec::new(ConvexKind::Hinge).unwrap(),
        );
        assert!(fit(&data, &hinge, &pen, &FitConfig::default()).is_err());
        // single row
        let tiny = Dataset::new(vec![1.0], 1, 1, vec![0.5], TaskKind::Regression).unwrap();
        assert!(matches!(
            fit(&tiny, &loss, &pen, &FitConfig::default()),
            Err(CocoError::Degenerate(_))
        ));
    }

    #[test]
    fn degenerate_trim_names_iteration() {
        // tcave with sigma = 0 zeroes every weight unless a loss is exactly 0
        let data =
            Dataset::new(vec![1.0, 2.0], 2, 1, vec![0.3, 1.9], TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Tcave, 0.0);
        let err = fit(&data, &loss, &PenaltySpec::none(), &FitConfig::coco()).unwrap_err();
        assert!(matches!(err, CocoError::DegenerateTrim { iteration: 1 }));
    }

    #[test]
    fn standardized_fit_returns_original_scale() {
        let mut state = 77_u64;
        let n = 50;
        let p = 2;
        // wildly different column scales
        let x: Vec<f64> = (0..n)
            .flat_map(|_| {
                [
                    1000.0 * (lcg(&mut state) - 0.5),
                    0.01 * (lcg(&mut state) - 0.5),
                ]
            })
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 + 0.003 * x[i * p] + 40.0 * x[i * p + 1] + 0.05 * lcg(&mut state))
            .collect();
        let data = Dataset::new(x, n, p, y, TaskKind::Regression).unwrap();
        let loss = gaussian_loss(ConcaveKind::Ccave, 5.0);
        let pen = PenaltySpec::lasso(1e-6, 1.0).unwrap();
        let config = FitConfig {
            init: Init::LeastSquaresFit,
            ..FitConfig::default()
        };
        let result = fit(&data, &loss, &pen, &config).unwrap();
        assert!(result.converged);
        // a nearly unpenalized standardized fit should still recover the
        // generating coefficients on the original scale
        assert_abs_diff_eq!(result.beta[1], 0.003, epsilon = 2e-4);
        assert_abs_diff_eq!(result.beta[2], 40.0, epsilon = 2.0);
    }
}
