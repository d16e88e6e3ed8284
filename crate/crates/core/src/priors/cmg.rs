//! Poisson-mixture model-size prior with the intrinsic prior on the Poisson rate.

use crate::error::{Error, Result};
use crate::numerics::quadrature::{log_integral_unimodal, QuadratureSpec};
use crate::numerics::special::log_gamma;
use crate::scalar::Real;

/// `ln π^I(λ)` for `π^I(λ) = e^{-(λ+1)} cosh(2√λ) / sqrt(πλ)`.
pub fn ln_cmg_lambda_density<T: Real>(lambda: T) -> Result<T> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::domain("cmg_lambda_density", format!("λ = {lambda} must be > 0")));
    }
    let root = lambda.sqrt();
    Ok(-(lambda + T::one()) + ln_cosh(root + root) - T::lit(0.5) * (T::PI() * lambda).ln())
}

/// Intrinsic prior density on the Poisson rate.
pub fn cmg_lambda_density<T: Real>(lambda: T) -> Result<T> {
    ln_cmg_lambda_density(lambda).map(T::exp)
}

fn ln_cosh<T: Real>(x: T) -> T {
    let a = x.abs();
    a + (-(a + a)).exp().ln_1p() - T::LN_2()
}

/// `ln ∫_0^∞ Po(d | λ) π^I(λ) dλ`, the unnormalized mass of dimension `d`.
///
/// Integrated over `t = √λ`, which removes the `λ^{-1/2}` endpoint singularity.
pub fn ln_poisson_mixture_mass<T: Real>(d: usize, spec: &QuadratureSpec<T>) -> Result<T> {
    let d_t = T::of(d);
    let ln_d_fact = log_gamma(d_t + T::one())?;
    let half_ln_pi = T::lit(0.5) * T::PI().ln();
    // ln[Po(d | t²) π^I(t²) 2t]; the 1/t of π^I cancels against the Jacobian.
    let psi = move |t: T| {
        let t2 = t * t;
        let ln_pois = if d == 0 { -t2 } else { d_t * (t2.ln()) - t2 - ln_d_fact };
        let ln_prior_times_jac = -(t2 + T::one()) + ln_cosh(t + t) - half_ln_pi + T::LN_2();
        ln_pois + ln_prior_times_jac
    };
    let peak = (T::one() + (T::one() + T::lit(8.0) * d_t).sqrt()) / T::lit(4.0);
    ln_integral(psi, peak, spec)
}

fn ln_integral<T: Real, F: Fn(T) -> T>(psi: F, peak: T, spec: &QuadratureSpec<T>) -> Result<T> {
    // The integrand decays like exp(-2(t - peak)²) on both sides.
    let hi = peak + T::lit(12.0);
    log_integral_unimodal(psi, T::zero(), hi, spec)
}

/// `ln ∫_0^∞ w(λ) π^I(λ) dλ` for a log-weight `ln w`.
pub fn ln_lambda_expectation<T: Real, G>(ln_weight: G, spec: &QuadratureSpec<T>) -> Result<T>
where
    G: Fn(T) -> T,
{
    let psi = move |t: T| {
        let t2 = t * t;
        -(t2 + T::one()) + ln_cosh(t + t) - T::lit(0.5) * T::PI().ln() + T::LN_2() + ln_weight(t2)
    };
    ln_integral(psi, T::lit(2.0), spec)
}
