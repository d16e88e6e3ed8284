//! Large-`k` approximations to dimension masses and inclusion probabilities.

use super::{hier_beta, PriorFamily, PriorKind};
use crate::scalar::Real;

/// Euler–Mascheroni constant, to the precision used by the harmonic approximation.
const EULER_GAMMA: f64 = 0.5772;

/// Large-`k` approximation to `ln 𝔐(d)`, or `None` outside the covered regimes.
///
/// Values are returned on the log scale because several of them (`2^{-k}`
/// terms) underflow for the `k` where the approximations are meant to be used.
pub fn approx_log_dimension_mass<T: Real>(family: &PriorFamily<T>, k: usize, d: usize) -> Option<T> {
    if k == 0 || d > k {
        return None;
    }
    let kt = T::of(k);
    let dt = T::of(d);
    let one = T::one();
    let two = T::lit(2.0);
    let ln_k = kt.ln();
    match family.kind {
        PriorKind::Jeffreys => Some(-ln_k),
        PriorKind::Uniform => {
            // Normal approximation to Binomial(k, 1/2).
            let z = dt - kt / two;
            Some(T::lit(0.5) * (two / (kt * T::PI())).ln() - two * z * z / kt)
        }
        PriorKind::BetaBinomial { a, b } if a == one && b == two => {
            let v = two / kt * (one - dt / kt);
            (v > T::zero()).then(|| v.ln())
        }
        PriorKind::HalfP => {
            if d == k {
                Some(one - kt * T::LN_2() - ln_k)
            } else if 2 * d < k {
                Some(two.ln() - ln_k)
            } else if 2 * d == k {
                Some(-(kt + one).ln())
            } else {
                None
            }
        }
        PriorKind::HierarchicalBeta => {
            let half_ln_k = T::lit(0.5) * ln_k;
            if d == 0 {
                Some((T::PI() / two).ln() - half_ln_k)
            } else if d == 1 {
                Some((T::PI() / T::lit(4.0)).ln() - half_ln_k)
            } else if d == k {
                if k < 2 {
                    return None;
                }
                Some(-(two * kt * ln_k).ln())
            } else {
                hier_beta::hierarchical_beta_density(dt / kt).ok().map(|v| v.ln() - ln_k)
            }
        }
        PriorKind::Harmonic => Some(-(dt + one).ln() - (kt + one).ln().ln()),
        PriorKind::Cmg => {
            // With the normalizing sum close to one, 𝔐(0) = e^{-1/2}/√2 and 𝔐(1) = 𝔐(0)/2.
            let ln_m0 = -T::lit(0.5) - T::lit(0.5) * T::LN_2();
            match d {
                0 => Some(ln_m0),
                1 => Some(ln_m0 - T::LN_2()),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Large-`k` approximation to the prior inclusion probability, for the
/// families whose exact value depends on `k` through more than a closed form.
pub fn approx_inclusion_probability<T: Real>(family: &PriorFamily<T>, k: usize) -> Option<T> {
    if k == 0 {
        return None;
    }
    let kt = T::of(k);
    let one = T::one();
    match family.kind {
        PriorKind::Cmg => Some((T::lit(1.5) / kt).min(one)),
        PriorKind::Harmonic => {
            let k1 = kt + one;
            let h = k1.ln() + T::lit(EULER_GAMMA) + one / (k1 + k1);
            Some((one + kt.recip()) / h - kt.recip())
        }
        _ => None,
    }
}
