//! Estimators entered in the Monte-Carlo comparisons, with the tuning
//! path for penalized fits.
//!
//! The unweighted baselines (least squares and friends) run through the
//! same outer loop as everything else, carried by a truncation component
//! whose threshold no loss value ever reaches, so every estimator shares
//! one fitting and tuning code path.

use crate::scenario::ScenarioData;
use coco_core::engine::{fit, Algorithm, FitConfig, Init};
use coco_core::{
    CocoError, CompositeLoss, ConcaveKind, ConcaveSpec, ConvexSpec, Dataset, PenaltyFamily,
    PenaltySpec, Result,
};

/// Truncation threshold far above any attainable convex loss; the
/// resulting weights are identically one.
const PASS_THROUGH_SIGMA: f64 = 1e300;

/// Points on the tuning grid.
pub const LAMBDA_GRID_LEN: usize = 50;
/// Smallest grid value relative to the largest.
pub const LAMBDA_MIN_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaRule {
    Fixed(f64),
    /// Pick the grid value minimizing the estimator's own loss on the
    /// tuning split.
    Tuned,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    /// The generating coefficients; no fitting.
    Oracle,
    /// Unweighted fit of a convex component.
    Convex(ConvexSpec),
    /// A reweighted composite fit.
    Composite(CompositeLoss),
}

#[derive(Debug, Clone)]
pub struct Estimator {
    pub name: String,
    pub kind: EstimatorKind,
    pub family: PenaltyFamily,
    pub alpha: f64,
    pub scad_a: f64,
    pub lambda: LambdaRule,
    pub algorithm: Algorithm,
    pub trim_h: Option<usize>,
    pub init: Init,
}

impl Estimator {
    pub fn unpenalized(name: &str, kind: EstimatorKind) -> Estimator {
        Estimator {
            name: name.into(),
            kind,
            family: PenaltyFamily::Lasso,
            alpha: 1.0,
            scad_a: coco_core::penalty::SCAD_DEFAULT_A,
            lambda: LambdaRule::Fixed(0.0),
            algorithm: Algorithm::Coco,
            trim_h: None,
            init: Init::Zeros,
        }
    }

    pub fn tuned(name: &str, kind: EstimatorKind, family: PenaltyFamily) -> Estimator {
        Estimator {
            name: name.into(),
            kind,
            family,
            alpha: 1.0,
            scad_a: coco_core::penalty::SCAD_DEFAULT_A,
            lambda: LambdaRule::Tuned,
            algorithm: Algorithm::Coco,
            trim_h: None,
            init: Init::Zeros,
        }
    }

    fn loss(&self) -> Result<CompositeLoss> {
        match &self.kind {
            EstimatorKind::Oracle => Err(CocoError::Validation(
                "the oracle estimator has no loss".into(),
            )),
            EstimatorKind::Convex(convex) => Ok(CompositeLoss::new(
                ConcaveSpec::new(ConcaveKind::Tcave, PASS_THROUGH_SIGMA)?,
                *convex,
            )),
            EstimatorKind::Composite(loss) => Ok(*loss),
        }
    }

    fn config(&self, init: Init) -> FitConfig {
        FitConfig {
            algorithm: self.algorithm,
            trim_h: self.trim_h,
            init,
            ..FitConfig::default()
        }
    }

    /// Fits on the scenario's training split, tuning the penalty on the
    /// tuning split when the rule asks for it. Returns the coefficient
    /// vector and the selected lambda.
    pub fn fit_scenario(&self, data: &ScenarioData) -> Result<(Vec<f64>, f64)> {
        if matches!(self.kind, EstimatorKind::Oracle) {
            return Ok((data.true_beta.clone(), 0.0));
        }
        let loss = self.loss()?;
        match self.lambda {
            LambdaRule::Fixed(lambda) => {
                let penalty =
                    PenaltySpec::new(self.family, lambda, self.alpha, self.scad_a)?;
                let result = fit(&data.train, &loss, &penalty, &self.config(self.init.clone()))?;
                Ok((result.beta, lambda))
            }
            LambdaRule::Tuned => {
                let tune = data.tune.as_ref().ok_or_else(|| {
                    CocoError::Validation(format!(
                        "estimator {} needs a tuning split to select lambda",
                        self.name
                    ))
                })?;
                let grid = lambda_grid(&data.train, self.alpha);
                let mut warm: Option<Vec<f64>> = None;
                let mut best: Option<(f64, Vec<f64>, f64)> = None;
                for &lambda in &grid {
                    let penalty =
                        PenaltySpec::new(self.family, lambda, self.alpha, self.scad_a)?;
                    let init = match &warm {
                        Some(beta) => Init::User(beta.clone()),
                        None => self.init.clone(),
                    };
                    let result = fit(&data.train, &loss, &penalty, &self.config(init))?;
                    warm = Some(result.beta.clone());
                    let score = tune_score(&result.beta, tune, &loss)?;
                    // strict improvement, so ties keep the sparser fit
                    // earlier on the descending path
                    let better = match &best {
                        Some((s, _, _)) => score < *s,
                        None => true,
                    };
                    if better {
                        best = Some((score, result.beta, lambda));
                    }
                }
                let (_, beta, lambda) = best.expect("grid is never empty");
                Ok((beta, lambda))
            }
        }
    }
}

/// Tuning criterion: the mean composite loss on the tuning split, except
/// for classification tasks, where the tuning-set misclassification rate
/// decides. Under label contamination the error rate of the flipped
/// split is an order-preserving transform of the clean error, while
/// unbounded margin losses are dragged by the flipped points.
fn tune_score(beta: &[f64], tune: &Dataset, loss: &CompositeLoss) -> Result<f64> {
    if tune.task() == coco_core::TaskKind::Classification {
        let f = tune.linear_predictor(beta)?;
        let wrong = (0..tune.n())
            .filter(|&i| {
                let pred = if f[i] >= 0.0 { 1.0 } else { -1.0 };
                pred != tune.y()[i]
            })
            .count();
        return Ok(wrong as f64 / tune.n() as f64);
    }
    let u = tune.margins(beta)?;
    let pass_y = tune.task().passes_response_to_loss();
    let mut acc = 0.0;
    for i in 0..tune.n() {
        let y = if pass_y { Some(tune.y()[i]) } else { None };
        acc += loss.gamma(u[i], y)?;
    }
    Ok(acc / tune.n() as f64)
}

/// Log-spaced tuning grid, largest first. The top value zeroes every
/// penalized coefficient under the L1 penalty: the largest absolute
/// column/response covariance on standardized predictors.
pub fn lambda_grid(train: &Dataset, alpha: f64) -> Vec<f64> {
    let n = train.n() as f64;
    let y_center = if train.has_intercept() {
        train.y().iter().sum::<f64>() / n
    } else {
        0.0
    };
    let mut lambda_max: f64 = 0.0;
    for j in 0..train.p() {
        let mean = if train.has_intercept() {
            train.column(j).sum::<f64>() / n
        } else {
            0.0
        };
        let var = train.column(j).map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        let mut cov = 0.0;
        for (i, x) in train.column(j).enumerate() {
            cov += (x - mean) / sd * (train.y()[i] - y_center);
        }
        lambda_max = lambda_max.max((cov / n).abs());
    }
    lambda_max /= alpha.max(1e-3);
    if lambda_max <= 0.0 {
        lambda_max = 1.0;
    }
    let ratio = LAMBDA_MIN_RATIO.powf(1.0 / (LAMBDA_GRID_LEN - 1) as f64);
    let mut grid = Vec::with_capacity(LAMBDA_GRID_LEN);
    let mut lambda = lambda_max;
    for _ in 0..LAMBDA_GRID_LEN {
        grid.push(lambda);
        lambda *= ratio;
    }
    grid
}

fn concave(kind: ConcaveKind, sigma: f64) -> ConcaveSpec {
    ConcaveSpec::new(kind, sigma).expect("catalog sigma values are valid")
}

/// The eight concave components at the sigma values used by the dense
/// regression comparison.
pub fn ex1_concaves() -> Vec<(ConcaveSpec, &'static str)> {
    vec![
        (concave(ConcaveKind::Hcave, 1.3), "hcave(1.3)"),
        (concave(ConcaveKind::Acave, 0.9), "acave(0.9)"),
        (concave(ConcaveKind::Bcave, 4.7), "bcave(4.7)"),
        (concave(ConcaveKind::Ccave, 1.5), "ccave(1.5)"),
        (concave(ConcaveKind::Dcave, 0.5), "dcave(0.5)"),
        (concave(ConcaveKind::Ecave, 1.5), "ecave(1.5)"),
        (concave(ConcaveKind::Gcave, 1.5), "gcave(1.5)"),
        (concave(ConcaveKind::Tcave, 1.0), "tcave(1.0)"),
    ]
}

/// Sigma values for the sparse regression comparison.
pub fn ex2_concaves() -> Vec<(ConcaveSpec, &'static str)> {
    vec![
        (concave(ConcaveKind::Hcave, 0.5), "hcave(0.5)"),
        (concave(ConcaveKind::Acave, 0.9), "acave(0.9)"),
        (concave(ConcaveKind::Bcave, 4.7), "bcave(4.7)"),
        (concave(ConcaveKind::Ccave, 1.5), "ccave(1.5)"),
        (concave(ConcaveKind::Dcave, 0.5), "dcave(0.5)"),
        (concave(ConcaveKind::Ecave, 9.0), "ecave(9.0)"),
        (concave(ConcaveKind::Gcave, 1.5), "gcave(1.5)"),
        (concave(ConcaveKind::Tcave, 2.5), "tcave(2.5)"),
    ]
}

/// Sigma values for the classification comparison.
pub fn ex3_concaves() -> Vec<(ConcaveSpec, &'static str)> {
    vec![
        (concave(ConcaveKind::Hcave, 1.0), "hcave(1)"),
        (concave(ConcaveKind::Acave, 1.0), "acave(1)"),
        (concave(ConcaveKind::Bcave, 3.5), "bcave(3.5)"),
        (concave(ConcaveKind::Ccave, 1.5), "ccave(1.5)"),
        (concave(ConcaveKind::Dcave, 4.5), "dcave(4.5)"),
        (concave(ConcaveKind::Ecave, 9.0), "ecave(9)"),
        (concave(ConcaveKind::Gcave, 1.5), "gcave(1.5)"),
        (concave(ConcaveKind::Tcave, 1.0), "tcave(1)"),
    ]
}

/// Unpenalized comparison: least squares, the eight reweighted
/// estimators (started from zero, which keeps the start insensitive to
/// the contamination) and the oracle.
pub fn ex1_estimators() -> Vec<Estimator> {
    let gaussian = ConvexSpec::new(coco_core::ConvexKind::Gaussian).unwrap();
    let mut out = vec![Estimator {
        init: Init::LeastSquaresFit,
        ..Estimator::unpenalized("LS", EstimatorKind::Convex(gaussian))
    }];
    for (g, name) in ex1_concaves() {
        out.push(Estimator::unpenalized(
            name,
            EstimatorKind::Composite(CompositeLoss::new(g, gaussian)),
        ));
    }
    out.push(Estimator::unpenalized("Oracle", EstimatorKind::Oracle));
    out
}

/// Penalized sparse comparison on the regression design.
pub fn ex2_estimators() -> Vec<Estimator> {
    let gaussian = ConvexSpec::new(coco_core::ConvexKind::Gaussian).unwrap();
    let mut out = vec![
        Estimator::tuned(
            "LS LASSO",
            EstimatorKind::Convex(gaussian),
            PenaltyFamily::Lasso,
        ),
        Estimator::tuned(
            "LS SCAD",
            EstimatorKind::Convex(gaussian),
            PenaltyFamily::Scad,
        ),
    ];
    for (g, name) in ex2_concaves() {
        for family in [PenaltyFamily::Lasso, PenaltyFamily::Scad] {
            let label = format!(
                "{name}{}",
                if family == PenaltyFamily::Lasso {
                    "LASSO"
                } else {
                    "SCAD"
                }
            );
            out.push(Estimator::tuned(
                &label,
                EstimatorKind::Composite(CompositeLoss::new(g, gaussian)),
                family,
            ));
        }
    }
    out.push(Estimator::unpenalized("Oracle", EstimatorKind::Oracle));
    out
}

/// Penalized classification comparison (margin squared error, fitted
/// without an intercept), with the optimal rule as the reference row.
pub fn ex3_estimators() -> Vec<Estimator> {
    let gaussian_c = ConvexSpec::new(coco_core::ConvexKind::GaussianC).unwrap();
    let mut out = vec![
        Estimator::tuned(
            "LS LASSO",
            EstimatorKind::Convex(gaussian_c),
            PenaltyFamily::Lasso,
        ),
        Estimator::tuned(
            "LS SCAD",
            EstimatorKind::Convex(gaussian_c),
            PenaltyFamily::Scad,
        ),
    ];
    for (g, name) in ex3_concaves() {
        for family in [PenaltyFamily::Lasso, PenaltyFamily::Scad] {
            let label = format!(
                "{name}{}",
                if family == PenaltyFamily::Lasso {
                    "LASSO"
                } else {
                    "SCAD"
                }
            );
            out.push(Estimator::tuned(
                &label,
                EstimatorKind::Composite(CompositeLoss::new(g, gaussian_c)),
                family,
            ));
        }
    }
    out.push(Estimator::unpenalized("Bayes", EstimatorKind::Oracle));
    out
}
