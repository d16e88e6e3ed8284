//! Seeded Gaussian regression fixtures.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::Dataset;
use crate::scalar::Real;

/// Recipe for `y = 1 + Σ_{j ∈ support} coefficient · x_j + noise_sd · ε` with
/// standard normal predictors sharing pairwise correlation `correlation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub k: usize,
    /// 0-based indices of the true variables.
    pub support: Vec<usize>,
    pub coefficient: f64,
    pub noise_sd: f64,
    pub correlation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, k: usize, support: Vec<usize>, seed: u64) -> Self {
        SyntheticSpec { n, k, support, coefficient: 1.0, noise_sd: 1.0, correlation: 0.0, seed }
    }

    pub fn with_coefficient(mut self, c: f64) -> Self {
        self.coefficient = c;
        self
    }

    pub fn with_noise_sd(mut self, s: f64) -> Self {
        self.noise_sd = s;
        self
    }

    pub fn with_correlation(mut self, r: f64) -> Self {
        self.correlation = r;
        self
    }

    fn validate(&self) -> Result<()> {
        if let Some(&j) = self.support.iter().find(|&&j| j >= self.k) {
            return Err(Error::InvalidArgument(format!("support index {j} out of range for k = {}", self.k)));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::InvalidArgument(format!("correlation {} must lie in [0, 1)", self.correlation)));
        }
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) || !self.coefficient.is_finite() {
            return Err(Error::InvalidArgument("noise sd must be positive and the coefficient finite".into()));
        }
        Ok(())
    }

    /// Columns `(y, x_1..x_k)` as `f64`.
    pub fn generate_columns(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let shared: Vec<f64> = (0..self.n).map(|_| draw()).collect();
        let (a, b) = (self.correlation.sqrt(), (1.0 - self.correlation).sqrt());
        let x: Vec<Vec<f64>> = (0..self.k)
            .map(|_| shared.iter().map(|&s| a * s + b * draw()).collect())
            .collect();
        let y = (0..self.n)
            .map(|i| 1.0 + self.support.iter().map(|&j| self.coefficient * x[j][i]).sum::<f64>() + self.noise_sd * draw())
            .collect();
        Ok((y, x))
    }

    /// The fixture as a dataset with an intercept, response `y` and candidates `x1..xk`.
    pub fn generate<T: Real>(&self) -> Result<Dataset<T>> {
        let (y, x) = self.generate_columns()?;
        let conv = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        Dataset::with_names(
            conv(y),
            vec![vec![T::one(); self.n]],
            x.into_iter().map(conv).collect(),
            "y".into(),
            vec!["(intercept)".into()],
            (1..=self.k).map(|j| format!("x{j}")).collect(),
        )
    }

    /// Writes the fixture as CSV with header `y,x1,...,xk`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let (y, x) = self.generate_columns()?;
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        let header: Vec<String> = std::iter::once("y".to_string()).chain((1..=self.k).map(|j| format!("x{j}"))).collect();
        w.write_record(&header).map_err(io)?;
        for i in 0..self.n {
            let row = std::iter::once(y[i]).chain(x.iter().map(|c| c[i])).map(|v| format!("{v:.17e}"));
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}
