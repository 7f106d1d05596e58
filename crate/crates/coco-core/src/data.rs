//! Datasets, task kinds and the margin mapping.

use crate::error::{CocoError, Result};

/// What the response variable is and how the margin is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// Continuous response; margin is the residual `y - f`.
    Regression,
    /// Labels in {-1, +1}; margin is `y * f`.
    Classification,
    /// Bernoulli response in {0, 1}; margin is the linear predictor.
    Binomial,
    /// Count response `y >= 0`; margin is the linear predictor.
    Poisson,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::Regression,
        TaskKind::Classification,
        TaskKind::Binomial,
        TaskKind::Poisson,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
            TaskKind::Binomial => "binomial",
            TaskKind::Poisson => "poisson",
        }
    }

    pub fn parse(name: &str) -> Result<TaskKind> {
        TaskKind::ALL
            .iter()
            .copied()
            .find(|t| t.name() == name)
            .ok_or_else(|| {
                CocoError::Validation(format!(
                    "unknown task '{name}'; valid tasks: regression, classification, binomial, poisson"
                ))
            })
    }

    /// Whether exponential-family evaluation needs the observed response.
    pub fn passes_response_to_loss(&self) -> bool {
        matches!(self, TaskKind::Binomial | TaskKind::Poisson)
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A design matrix (without the intercept column), a response vector and
/// the task kind. Row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    n: usize,
    p: usize,
    y: Vec<f64>,
    task: TaskKind,
    intercept: bool,
}

impl Dataset {
    /// Builds a dataset with an (implicit) intercept column. `x` is
    /// row-major with `n * p` entries.
    pub fn new(x: Vec<f64>, n: usize, p: usize, y: Vec<f64>, task: TaskKind) -> Result<Dataset> {
        Self::build(x, n, p, y, task, true)
    }

    /// Builds a dataset fitted without an intercept.
    pub fn without_intercept(
        x: Vec<f64>,
        n: usize,
        p: usize,
        y: Vec<f64>,
        task: TaskKind,
    ) -> Result<Dataset> {
        Self::build(x, n, p, y, task, false)
    }

    fn build(
        x: Vec<f64>,
        n: usize,
        p: usize,
        y: Vec<f64>,
        task: TaskKind,
        intercept: bool,
    ) -> Result<Dataset> {
        if x.len() != n * p {
            return Err(CocoError::Validation(format!(
                "design matrix has {} entries, expected n*p = {}",
                x.len(),
                n * p
            )));
        }
        if y.len() != n {
            return Err(CocoError::Validation(format!(
                "response has {} entries, expected n = {n}",
                y.len()
            )));
        }
        let ds = Dataset {
            x,
            n,
            p,
            y,
            task,
            intercept,
        };
        ds.validate_labels()?;
        Ok(ds)
    }

    fn validate_labels(&self) -> Result<()> {
        match self.task {
            TaskKind::Classification => {
                for (i, &y) in self.y.iter().enumerate() {
                    if y != 1.0 && y != -1.0 {
                        return Err(CocoError::Validation(format!(
                            "classification labels must be -1 or +1; row {i} has y = {y}"
                        )));
                    }
                }
            }
            TaskKind::Binomial => {
                for (i, &y) in self.y.iter().enumerate() {
                    if y != 0.0 && y != 1.0 {
                        return Err(CocoError::Validation(format!(
                            "binomial responses must be 0 or 1; row {i} has y = {y}"
                        )));
                    }
                }
            }
            TaskKind::Poisson => {
                for (i, &y) in self.y.iter().enumerate() {
                    if y < 0.0 || !y.is_finite() {
                        return Err(CocoError::Validation(format!(
                            "poisson responses must be nonnegative; row {i} has y = {y}"
                        )));
                    }
                }
            }
            TaskKind::Regression => {}
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// Length of a coefficient vector for this dataset.
    pub fn n_coefs(&self) -> usize {
        self.p + usize::from(self.intercept)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    /// Raw column iterator (strided view over the row-major storage).
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x[i * self.p + j])
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.n_coefs() {
            return Err(CocoError::Validation(format!(
                "coefficient vector has length {}, expected {}",
                beta.len(),
                self.n_coefs()
            )));
        }
        Ok(())
    }

    /// Linear predictor `f_i = x_i' beta` (with the intercept leading
    /// `beta` when the dataset carries one).
    pub fn linear_predictor(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_beta(beta)?;
        let (b0, slopes) = if self.intercept {
            (beta[0], &beta[1..])
        } else {
            (0.0, beta)
        };
        let mut f = vec![b0; self.n];
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.p {
                acc += row[j] * slopes[j];
            }
            f[i] += acc;
        }
        Ok(f)
    }

    /// Margins `u_i` per task: `y - f` (regression), `y * f`
    /// (classification) or `f` (exponential family).
    pub fn margins(&self, beta: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.linear_predictor(beta)?;
        match self.task {
            TaskKind::Regression => {
                for i in 0..self.n {
                    f[i] = self.y[i] - f[i];
                }
            }
            TaskKind::Classification => {
                for i in 0..self.n {
                    f[i] *= self.y[i];
                }
            }
            TaskKind::Binomial | TaskKind::Poisson => {}
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_mapping_per_task() {
        let ds = Dataset::new(vec![0.5], 1, 1, vec![2.0], TaskKind::Regression).unwrap();
        // beta = (0, 1): f = 0.5, u = 2 - 0.5
        assert_eq!(ds.margins(&[0.0, 1.0]).unwrap(), vec![1.5]);

        let ds = Dataset::new(vec![2.0], 1, 1, vec![-1.0], TaskKind::Classification).unwrap();
        assert_eq!(ds.margins(&[0.0, 1.0]).unwrap(), vec![-2.0]);

        let ds = Dataset::new(vec![0.7], 1, 1, vec![3.0], TaskKind::Poisson).unwrap();
        assert_eq!(ds.margins(&[0.0, 1.0]).unwrap(), vec![0.7]);
    }

    #[test]
    fn label_validation() {
        assert!(Dataset::new(vec![1.0], 1, 1, vec![0.5], TaskKind::Classification).is_err());
        assert!(Dataset::new(vec![1.0], 1, 1, vec![2.0], TaskKind::Binomial).is_err());
        assert!(Dataset::new(vec![1.0], 1, 1, vec![-1.0], TaskKind::Poisson).is_err());
        assert!(Dataset::new(vec![1.0], 1, 1, vec![7.0], TaskKind::Poisson).is_ok());
    }

    #[test]
    fn intercept_convention() {
        let ds = Dataset::new(vec![1.0, 2.0], 2, 1, vec![0.0, 0.0], TaskKind::Regression).unwrap();
        assert_eq!(ds.n_coefs(), 2);
        assert_eq!(ds.linear_predictor(&[1.0, 2.0]).unwrap(), vec![3.0, 5.0]);
        let ds = Dataset::without_intercept(
            vec![1.0, 2.0],
            2,
            1,
            vec![0.0, 0.0],
            TaskKind::Regression,
        )
        .unwrap();
        assert_eq!(ds.n_coefs(), 1);
        assert_eq!(ds.linear_predictor(&[2.0]).unwrap(), vec![2.0, 4.0]);
        assert!(ds.linear_predictor(&[1.0, 2.0]).is_err());
    }
}
