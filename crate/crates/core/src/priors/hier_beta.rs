//! Hierarchical Beta mixing density: `p ~ Beta(1, α)` with `π(α) = α^{-3/2}/2` on `(1, ∞)`.

use crate::error::{Error, Result};
use crate::numerics::quadrature::{log_integral_unimodal, QuadratureSpec};
use crate::numerics::special::{ln_erfc, normal_cdf};
use crate::scalar::Real;

/// Closed form `√π Φ(-sqrt(-2 ln(1-p))) / ((1-p) sqrt(-ln(1-p)))`.
pub fn hierarchical_beta_density<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::domain(
            "hierarchical_beta_density",
            format!("p = {p} must lie strictly inside (0, 1)"),
        ));
    }
    let u = -(-p).ln_1p();
    let tail = normal_cdf(-(u + u).sqrt());
    Ok(T::PI().sqrt() * tail / ((T::one() - p) * u.sqrt()))
}

/// `ln ∫_0^1 p^d (1-p)^{k-d} π^{HB}(p) dp`, the per-model prior probability.
///
/// With `p = 1 - e^{-t²}` the mixing measure becomes `√π erfc(t) dt`, so the
/// integrand `(1 - e^{-t²})^d e^{-(k-d) t²} erfc(t)` is smooth on `(0, ∞)`.
pub fn ln_model_integral<T: Real>(k: usize, d: usize, spec: &QuadratureSpec<T>) -> Result<T> {
    if d > k {
        return Err(Error::domain("hierarchical beta", format!("d = {d} > k = {k}")));
    }
    let d_t = T::of(d);
    let rest = T::of(k - d);
    let psi = move |t: T| {
        let t2 = t * t;
        let inc = if d == 0 { T::zero() } else { d_t * (-(-t2).exp_m1()).ln() };
        inc - rest * t2 + ln_erfc(t)
    };
    // erfc(t) < e^{-t²} bounds the right tail whatever k and d are.
    let hi = T::lit(2.0) * (T::of(k.max(2)).ln()).sqrt() + T::lit(8.0);
    Ok(T::lit(0.5) * T::PI().ln() + log_integral_unimodal(psi, T::zero(), hi, spec)?)
}

/// Mean of the hierarchical Beta mixing density, `1 - π/4`.
pub fn mixing_mean<T: Real>() -> T {
    T::one() - T::FRAC_PI_4()
}
