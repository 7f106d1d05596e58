//! The three simulation designs and their contamination mechanisms.
//!
//! - Example 1: linear model, five correlated predictors, optional
//!   vertical outliers (shifted errors) and leverage points (shifted
//!   predictors on the same rows).
//! - Example 2: the sparse variant with fifty predictors and a tuning
//!   split.
//! - Example 3: binary labels from a halfplane rule on the unit disk
//!   plus noise predictors, with a share of training/tuning labels
//!   flipped; fitted without an intercept.
//!
//! Test splits are never contaminated. For the label-flip design the
//! reported test error adds the analytic contamination floor (see
//! [`crate::metrics`]), which is how the flipped-evaluation convention
//! is reproduced without touching the test labels.

use coco_core::{CocoError, Dataset, Result, TaskKind};
use rand::distributions::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Ex1,
    Ex2,
    Ex3,
}

impl Example {
    pub fn name(&self) -> &'static str {
        match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
        }
    }

    pub fn parse(name: &str) -> Result<Example> {
        match name {
            "ex1" => Ok(Example::Ex1),
            "ex2" => Ok(Example::Ex2),
            "ex3" => Ok(Example::Ex3),
            _ => Err(CocoError::Validation(format!(
                "unknown scenario '{name}'; valid scenarios: ex1, ex2, ex3"
            ))),
        }
    }
}

impl std::fmt::Display for Example {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Contamination {
    None,
    /// A fixed share of training/tuning errors drawn from N(20, 0.5^2).
    Vertical,
    /// Vertical outliers whose predictors are additionally N(50, 1).
    VerticalLeverage,
    /// A share of training/tuning labels flipped (classification only).
    LabelFlip(f64),
}

impl Contamination {
    pub fn label(&self) -> String {
        match self {
            Contamination::None => "none".into(),
            Contamination::Vertical => "vertical".into(),
            Contamination::VerticalLeverage => "verticalLeverage".into(),
            Contamination::LabelFlip(v) => format!("flip{:.0}%", 100.0 * v),
        }
    }
}

/// Share of rows contaminated by the vertical/leverage mechanisms.
pub const CONTAMINATION_RATE: f64 = 0.1;
const NOISE_SD: f64 = 0.5;
const OUTLIER_MEAN: f64 = 20.0;
const LEVERAGE_MEAN: f64 = 50.0;
const AR_RHO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub example: Example,
    pub contamination: Contamination,
    pub n_train: usize,
    pub n_tune: usize,
    pub n_test: usize,
    pub p: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn ex1(contamination: Contamination, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            example: Example::Ex1,
            contamination,
            n_train: 100,
            n_tune: 0,
            n_test: 100,
            p: 5,
            seed,
        }
    }

    pub fn ex2(contamination: Contamination, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            example: Example::Ex2,
            contamination,
            n_train: 100,
            n_tune: 100,
            n_test: 100,
            p: 50,
            seed,
        }
    }

    pub fn ex3(flip_pct: f64, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            example: Example::Ex3,
            contamination: Contamination::LabelFlip(flip_pct),
            n_train: 100,
            n_tune: 100,
            n_test: 10_000,
            p: 20,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(CocoError::Validation(
                "n_train and n_test must be positive".into(),
            ));
        }
        match (self.example, self.contamination) {
            (Example::Ex3, Contamination::LabelFlip(v)) => {
                if !(0.0..=0.5).contains(&v) {
                    return Err(CocoError::Validation(format!(
                        "label flip share must lie in [0, 0.5], got {v}"
                    )));
                }
                if self.p < 2 {
                    return Err(CocoError::Validation(
                        "the halfplane design needs p >= 2".into(),
                    ));
                }
            }
            (Example::Ex3, _) => {
                return Err(CocoError::Validation(
                    "the classification design takes a label-flip contamination".into(),
                ))
            }
            (_, Contamination::LabelFlip(_)) => {
                return Err(CocoError::Validation(
                    "label flips apply to the classification design only".into(),
                ))
            }
            _ => {}
        }
        if self.example == Example::Ex1 && self.p != 5 {
            return Err(CocoError::Validation("the dense design has p = 5".into()));
        }
        Ok(())
    }

    pub fn task(&self) -> TaskKind {
        match self.example {
            Example::Ex1 | Example::Ex2 => TaskKind::Regression,
            Example::Ex3 => TaskKind::Classification,
        }
    }

    /// Generating coefficients in the dataset's layout (intercept first
    /// for the regression designs, none for the classification design).
    pub fn true_beta(&self) -> Vec<f64> {
        match self.example {
            Example::Ex1 => vec![0.0, 1.5, 0.5, 1.0, 1.5, 1.0],
            Example::Ex2 => {
                let mut beta = vec![0.0; self.p + 1];
                beta[1] = 1.5;
                beta[2] = 0.5;
                beta[4] = 1.0;
                beta[7] = 1.5;
                beta[11] = 1.0;
                beta
            }
            Example::Ex3 => {
                let mut beta = vec![0.0; self.p];
                beta[0] = 1.0;
                beta[1] = -1.0;
                beta
            }
        }
    }

    /// Zero-based indices of the signal predictors.
    pub fn signal_support(&self) -> Vec<usize> {
        match self.example {
            Example::Ex1 => (0..5).collect(),
            Example::Ex2 => vec![0, 1, 3, 6, 10],
            Example::Ex3 => vec![0, 1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub train: Dataset,
    pub tune: Option<Dataset>,
    pub test: Dataset,
    pub true_beta: Vec<f64>,
    pub signal_support: Vec<usize>,
    pub contaminated_train_rows: Vec<usize>,
    pub contaminated_tune_rows: Vec<usize>,
}

/// Deterministically generates the scenario's splits from its seed.
pub fn generate(spec: &ScenarioSpec) -> Result<ScenarioData> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    match spec.example {
        Example::Ex1 | Example::Ex2 => generate_regression(spec, &mut rng),
        Example::Ex3 => generate_classification(spec, &mut rng),
    }
}

fn contaminated_count(rate: f64, n: usize) -> usize {
    (rate * n as f64).ceil() as usize
}

/// Correlated predictors with covariance 0.5^|i-j| via the AR(1)
/// recursion, one row at a time.
fn ar1_row(rng: &mut ChaCha12Rng, p: usize) -> Vec<f64> {
    let scale = (1.0 - AR_RHO * AR_RHO).sqrt();
    let mut row = Vec::with_capacity(p);
    let mut prev: f64 = rng.sample(StandardNormal);
    row.push(prev);
    for _ in 1..p {
        let z: f64 = rng.sample(StandardNormal);
        prev = AR_RHO * prev + scale * z;
        row.push(prev);
    }
    row
}

fn generate_regression(spec: &ScenarioSpec, rng: &mut ChaCha12Rng) -> Result<ScenarioData> {
    let beta = spec.true_beta();
    let mut make_split = |n: usize, contaminate: bool| -> Result<(Dataset, Vec<usize>)> {
        let p = spec.p;
        let mut x = Vec::with_capacity(n * p);
        for _ in 0..n {
            x.extend(ar1_row(rng, p));
        }
        let mut eps: Vec<f64> = (0..n)
            .map(|_| NOISE_SD * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut rows = Vec::new();
        if contaminate && spec.contamination != Contamination::None {
            let m = contaminated_count(CONTAMINATION_RATE, n);
            rows = rand::seq::index::sample(rng, n, m).into_vec();
            rows.sort_unstable();
            for &i in &rows {
                eps[i] = OUTLIER_MEAN + NOISE_SD * rng.sample::<f64, _>(StandardNormal);
            }
        }
        // responses come from the clean predictors; leverage replaces the
        // predictors afterwards, so those rows contradict the model
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let mut f = beta[0];
                for j in 0..p {
                    f += beta[1 + j] * x[i * p + j];
                }
                f + eps[i]
            })
            .collect();
        if contaminate && spec.contamination == Contamination::VerticalLeverage {
            for &i in &rows {
                for j in 0..p {
                    x[i * p + j] = LEVERAGE_MEAN + rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        Ok((Dataset::new(x, n, p, y, TaskKind::Regression)?, rows))
    };

    let (train, train_rows) = make_split(spec.n_train, true)?;
    let (tune, tune_rows) = if spec.n_tune > 0 {
        let (d, r) = make_split(spec.n_tune, true)?;
        (Some(d), r)
    } else {
        (None, Vec::new())
    };
    let (test, _) = make_split(spec.n_test, false)?;
    Ok(ScenarioData {
        train,
        tune,
        test,
        true_beta: spec.true_beta(),
        signal_support: spec.signal_support(),
        contaminated_train_rows: train_rows,
        contaminated_tune_rows: tune_rows,
    })
}

/// A point uniform on the unit disk, by rejection from the square.
fn disk_point(rng: &mut ChaCha12Rng) -> (f64, f64) {
    let unit = Uniform::new_inclusive(-1.0, 1.0);
    loop {
        let a = unit.sample(rng);
        let b = unit.sample(rng);
        if a * a + b * b <= 1.0 {
            return (a, b);
        }
    }
}

fn generate_classification(spec: &ScenarioSpec, rng: &mut ChaCha12Rng) -> Result<ScenarioData> {
    let flip = match spec.contamination {
        Contamination::LabelFlip(v) => v,
        _ => unreachable!("validated"),
    };
    let mut make_split = |n: usize, contaminate: bool| -> Result<(Dataset, Vec<usize>)> {
        let p = spec.p;
        let unit = Uniform::new_inclusive(-1.0, 1.0);
        let mut x = Vec::with_capacity(n * p);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = disk_point(rng);
            x.push(a);
            x.push(b);
            for _ in 2..p {
                x.push(unit.sample(rng));
            }
            y.push(if a >= b { 1.0 } else { -1.0 });
        }
        let mut rows = Vec::new();
        if contaminate && flip > 0.0 {
            let m = contaminated_count(flip, n);
            rows = rand::seq::index::sample(rng, n, m).into_vec();
            rows.sort_unstable();
            for &i in &rows {
                y[i] = -y[i];
            }
        }
        Ok((
            Dataset::without_intercept(x, n, p, y, TaskKind::Classification)?,
            rows,
        ))
    };

    let (train, train_rows) = make_split(spec.n_train, true)?;
    let (tune, tune_rows) = if spec.n_tune > 0 {
        let (d, r) = make_split(spec.n_tune, true)?;
        (Some(d), r)
    } else {
        (None, Vec::new())
    };
    let (test, _) = make_split(spec.n_test, false)?;
    Ok(ScenarioData {
        train,
        tune,
        test,
        true_beta: spec.true_beta(),
        signal_support: spec.signal_support(),
        contaminated_train_rows: train_rows,
        contaminated_tune_rows: tune_rows,
    })
}
