//! Special functions and quadrature shared by the rest of the crate.

pub mod quadrature;
pub mod special;

pub use quadrature::{
    gauss_chebyshev_weighted, integrate, integrate_adaptive, integrate_adaptive_from, integrate_to_infinity, Estimate,
    QuadratureScheme, QuadratureSpec,
};
pub use special::{
    erfc, harmonic_number, ln_erfc, ln_regularized_incomplete_beta, log_beta, log_gamma,
    normal_cdf, regularized_incomplete_beta,
};

use crate::scalar::Real;

/// `ln Σ exp(x_i)`; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let s: T = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Streaming log-sum-exp accumulator; merging two accumulators is
/// independent of the order in which terms were added up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp<T> {
    max: T,
    scaled: T,
}

impl<T: Real> Default for LogSumExp<T> {
    fn default() -> Self {
        LogSumExp { max: T::neg_infinity(), scaled: T::zero() }
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn add(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + T::one();
            self.max = x;
        } else {
            self.scaled = self.scaled + (x - self.max).exp();
        }
    }

    pub fn merge(self, other: Self) -> Self {
        if other.max == T::neg_infinity() {
            return self;
        }
        if self.max == T::neg_infinity() {
            return other;
        }
        if self.max >= other.max {
            LogSumExp {
                max: self.max,
                scaled: self.scaled + other.scaled * (other.max - self.max).exp(),
            }
        } else {
            other.merge(self)
        }
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            self.max
        } else {
            self.max + self.scaled.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_large_magnitudes() {
        let xs = [-1000.0f64, -1000.0];
        assert!((log_sum_exp(&xs) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn streaming_matches_batch() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 * 3.0 - 700.0).collect();
        let mut acc = LogSumExp::default();
        xs.iter().for_each(|&x| acc.add(x));
        assert!((acc.value() - log_sum_exp(&xs)).abs() < 1e-12);
        let (a, b) = xs.split_at(17);
        let mut l = LogSumExp::default();
        let mut r = LogSumExp::default();
        a.iter().for_each(|&x| l.add(x));
        b.iter().for_each(|&x| r.add(x));
        assert!((r.merge(l).value() - log_sum_exp(&xs)).abs() < 1e-12);
    }
}
