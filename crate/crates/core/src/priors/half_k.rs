//! Jeffreys probabilities up to half the model size, a flat tail beyond it,
//! joined continuously.

use crate::error::{Error, Result};
use crate::model_space::{big_model_count, log_choose};
use crate::scalar::Real;

/// Largest dimension that keeps the Jeffreys-shaped prior.
pub fn last_jeffreys_dimension(k: usize) -> usize {
    if k % 2 == 0 {
        k / 2
    } else {
        (k - 1) / 2
    }
}

/// Constants `(C1, C2)` scaling the lower (Jeffreys) and upper (flat) pieces.
///
/// They are the solution of the two linear conditions "total mass is one" and
/// "the per-model prior at the last Jeffreys dimension equals the per-model
/// prior at the first flat dimension".
pub fn half_k_constants<T: Real>(k: usize) -> Result<(T, T)> {
    if k == 0 {
        return Err(Error::InvalidArgument("half-k prior needs k >= 1".into()));
    }
    let kt = T::of(k);
    let one = T::one();
    let two = T::lit(2.0);
    let ln_big = big_model_count::<T>(k)?;
    let j = last_jeffreys_dimension(k);
    let ln_mid = log_choose::<T>(k, j)?;
    if k % 2 == 0 {
        // Lower mass C1 (k+2)/(2(k+1)), upper mass C2 k/(2(k+1)),
        // join C1 / ((k+1) C(k,k/2)) = C2 k / (2 (k+1) N_k).
        let r = (T::LN_2() + ln_big - ln_mid).exp();
        let c2 = two * (kt + one) * r / (kt * (kt + two) + kt * r);
        let c1 = c2 * kt / r;
        Ok((c1, c2))
    } else {
        // Lower mass C1/2, upper mass C2/2,
        // join C1 / ((k+1) C(k,(k-1)/2)) = C2 / (2 N_k).
        let s = (T::LN_2() + ln_big - (kt + one).ln() - ln_mid).exp();
        let c2 = two * s / (one + s);
        Ok((two - c2, c2))
    }
}

/// Per-model log prior for every dimension `0..=k`.
pub fn log_per_model<T: Real>(k: usize) -> Result<Vec<T>> {
    let (c1, c2) = half_k_constants::<T>(k)?;
    let kt = T::of(k);
    let ln_k1 = (kt + T::one()).ln();
    let ln_big = big_model_count::<T>(k)?;
    let upper = if k % 2 == 0 {
        c2.ln() + kt.ln() - T::LN_2() - ln_k1 - ln_big
    } else {
        c2.ln() - T::LN_2() - ln_big
    };
    let j = last_jeffreys_dimension(k);
    (0..=k)
        .map(|d| {
            if d <= j {
                Ok(c1.ln() - ln_k1 - log_choose::<T>(k, d)?)
            } else {
                Ok(upper)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Solves the 2x2 system `[a11 a12; a21 a22] [c1 c2]' = [b1 b2]'` by Cramer's rule.
    fn solve(a11: f64, a12: f64, a21: f64, a22: f64, b1: f64, b2: f64) -> (f64, f64) {
        let det = a11 * a22 - a12 * a21;
        ((b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det)
    }

    fn choose(k: usize, d: usize) -> f64 {
        (0..d).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
    }

    fn linear_solve_oracle(k: usize) -> (f64, f64) {
        let j = last_jeffreys_dimension(k);
        let n_big: f64 = (j + 1..=k).map(|i| choose(k, i)).sum();
        let kf = k as f64;
        // Per-model pieces before scaling: lower 1/((k+1) C(k,d)), upper u.
        let upper = if k % 2 == 0 { kf / (2.0 * (kf + 1.0) * n_big) } else { 1.0 / (2.0 * n_big) };
        let lower_mass = (j + 1) as f64 / (kf + 1.0);
        let upper_mass = upper * n_big;
        let join_lower = 1.0 / ((kf + 1.0) * choose(k, j));
        solve(lower_mass, upper_mass, join_lower, -upper, 1.0, 0.0)
    }

    #[test]
    fn constants_match_linear_solve() {
        for k in 1..=30usize {
            let (c1, c2) = half_k_constants::<f64>(k).unwrap();
            let (o1, o2) = linear_solve_oracle(k);
            assert!((c1 - o1).abs() < 1e-12 && (c2 - o2).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn k2_and_k3_values() {
        let (c1, c2) = half_k_constants::<f64>(2).unwrap();
        assert!((c1 - 1.2).abs() < 1e-14 && (c2 - 0.6).abs() < 1e-14);
        // k = 3: N = 4, C(3,1) = 3, s = 8/12, C2 = 0.8, C1 = 1.2
        let (c1, c2) = half_k_constants::<f64>(3).unwrap();
        assert!((c1 - 1.2).abs() < 1e-14 && (c2 - 0.8).abs() < 1e-14);
    }

    #[test]
    fn join_is_continuous() {
        for k in 2..=200usize {
            let lp = log_per_model::<f64>(k).unwrap();
            let j = last_jeffreys_dimension(k);
            assert!((lp[j] - lp[j + 1]).abs() < 1e-12 * lp[j].abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn sums_to_one_over_all_models() {
        for k in 1..=15usize {
            let lp = log_per_model::<f64>(k).unwrap();
            let total: f64 = (0..1u32 << k)
                .map(|mask| lp[mask.count_ones() as usize].exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "k={k}: {total}");
        }
    }
}
