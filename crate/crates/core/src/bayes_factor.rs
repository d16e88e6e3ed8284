//! Intrinsic-prior Bayes factor of `M_γ` against the null model `M_0`:
//!
//! `B_γ = ∫_0^∞ (1 + g SSE_γ/SSE_0)^{-(n-k0)/2} (1 + g)^{(n-|γ|-k0)/2} p^I(g) dg`,
//!
//! with mixing density `p^I(g) = √g0 / (π g sqrt(g - g0))` on `(g0, ∞)` and
//! `g0 = (n - k0) / (|γ| + 1)`.
//!
//! Substituting `v = g0 / g` turns the mixing measure into the arcsine
//! density on `(0, 1)` and the rest of the integrand into
//! `h(v) = v^{|γ|/2} (v + g0 q)^{-(n-k0)/2} (v + g0)^{(n-|γ|-k0)/2}`,
//! so `B_γ` is the arcsine-mean of `h` and a Gauss-Chebyshev rule of the
//! first kind applies with equal weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::FitStatistics;
use crate::numerics::quadrature::{chebyshev_angles, integrate_adaptive_from, QuadratureSpec};
use crate::numerics::LogSumExp;
use crate::scalar::Real;

/// Default number of Gauss-Chebyshev nodes.
pub const DEFAULT_NODES: usize = 201;

/// Arguments of the Bayes factor. The data enter only through `q = SSE_γ / SSE_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorInput<T> {
    pub n: usize,
    pub k0: usize,
    pub dim: usize,
    pub q: T,
}

impl<T: Real> BayesFactorInput<T> {
    pub fn new(n: usize, k0: usize, dim: usize, q: T) -> Self {
        BayesFactorInput { n, k0, dim, q }
    }

    pub fn from_fit(fit: &FitStatistics<T>) -> Self {
        BayesFactorInput { n: fit.n, k0: fit.k0, dim: fit.dim, q: fit.ratio() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::domain("log_bayes_factor", "dim must be >= 1; the null model has B = 1"));
        }
        if self.n < self.k0 + self.dim + 1 {
            return Err(Error::domain(
                "log_bayes_factor",
                format!("need n - k0 - dim >= 1, got n = {}, k0 = {}, dim = {}", self.n, self.k0, self.dim),
            ));
        }
        let slack = T::one() + T::lit(64.0) * T::epsilon();
        if !(self.q > T::zero() && self.q <= slack) {
            return Err(Error::domain("log_bayes_factor", format!("q = {} outside (0, 1]", self.q)));
        }
        Ok(())
    }

    /// `g0 = (n - k0) / (dim + 1)`.
    pub fn g0(&self) -> T {
        T::of(self.n - self.k0) / T::of(self.dim + 1)
    }
}

/// `p^I(g)` for `g > g0 = (n - k0)/(dim + 1)`.
pub fn mixing_density<T: Real>(g: T, n: usize, k0: usize, dim: usize) -> Result<T> {
    if n <= k0 {
        return Err(Error::domain("mixing_density", format!("need n > k0, got n = {n}, k0 = {k0}")));
    }
    let g0 = T::of(n - k0) / T::of(dim + 1);
    if !(g > g0) || !g.is_finite() {
        return Err(Error::domain("mixing_density", format!("g = {g} must exceed g0 = {g0}")));
    }
    Ok(g0.sqrt() / (g * T::PI() * (g - g0).sqrt()))
}

/// `ln B_γ + ln Pr(M_γ)`, the unnormalized log posterior.
pub fn log_posterior_unnormalized<T: Real>(log_bf: T, log_prior: T) -> T {
    log_bf + log_prior
}

/// Evaluates `ln B_γ` with precomputed Chebyshev node tables.
///
/// The `n`-node rule is compared with the nested `3n`-node rule; when they
/// disagree by more than the escalation tolerance the integral is redone
/// adaptively in the angle variable.
#[derive(Debug, Clone)]
pub struct BayesFactorEngine<T> {
    nodes: usize,
    /// `(θ, v, ln v)` for the `3n`-node rule.
    fine: Vec<(T, T, T)>,
    escalate_tol: T,
    adaptive: QuadratureSpec<T>,
}

impl<T: Real> Default for BayesFactorEngine<T> {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}

impl<T: Real> BayesFactorEngine<T> {
    pub fn new(nodes: usize) -> Self {
        let nodes = nodes.max(2);
        let half = T::lit(0.5);
        let fine = chebyshev_angles::<T>(3 * nodes)
            .map(|th| {
                // v = (1 + cos θ)/2 = cos²(θ/2), accurate near both ends.
                let c = (th * half).cos();
                let v = c * c;
                (th, v, v.ln())
            })
            .collect();
        BayesFactorEngine {
            nodes,
            fine,
            escalate_tol: T::lit(1e-8).max(T::lit(64.0) * T::epsilon()),
            adaptive: QuadratureSpec::adaptive(T::zero(), T::lit(1e-12).max(T::lit(16.0) * T::epsilon())),
        }
    }

    pub fn with_escalation_tolerance(mut self, tol: T) -> Self {
        self.escalate_tol = tol;
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// `ln B_γ`.
    pub fn log_bayes_factor(&self, input: &BayesFactorInput<T>) -> Result<T> {
        input.validate()?;
        let log_h = LogIntegrand::new(input);
        let mut coarse = LogSumExp::default();
        let mut fine = LogSumExp::default();
        for (i, &(_, v, ln_v)) in self.fine.iter().enumerate() {
            let lh = log_h.eval(v, ln_v);
            fine.add(lh);
            // The n-node angles are every third 3n-node angle, starting from the second.
            if i % 3 == 1 {
                coarse.add(lh);
            }
        }
        let ln_fine = fine.value() - T::of(3 * self.nodes).ln();
        let ln_coarse = coarse.value() - T::of(self.nodes).ln();
        if !ln_fine.is_finite() {
            return Err(Error::domain("log_bayes_factor", format!("non-finite estimate {ln_fine}")));
        }
        if (ln_fine - ln_coarse).abs() <= self.escalate_tol {
            return Ok(ln_fine);
        }
        self.adaptive_log_bayes_factor(&log_h)
    }

    /// `ln((1/π) ∫_0^π h(cos²(θ/2)) dθ)` by panel-seeded adaptive Gauss-Kronrod.
    fn adaptive_log_bayes_factor(&self, log_h: &LogIntegrand<T>) -> Result<T> {
        let half = T::lit(0.5);
        let psi = |th: T| {
            let c = (th * half).cos();
            let v = c * c;
            log_h.eval(v, v.ln())
        };
        let (peak_th, peak) = self
            .fine
            .iter()
            .map(|&(th, v, ln_v)| (th, log_h.eval(v, ln_v)))
            .fold((T::zero(), T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
        const PANELS: usize = 16;
        let pi = T::PI();
        let mut breaks: Vec<T> = (0..=PANELS).map(|i| pi * T::of(i) / T::of(PANELS)).collect();
        if peak_th > T::zero() && peak_th < pi && !breaks.contains(&peak_th) {
            breaks.push(peak_th);
            breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        }
        let est = integrate_adaptive_from(|th| (psi(th) - peak).exp(), &breaks, &self.adaptive)?;
        Ok(peak + (est.value / pi).ln())
    }

    /// `ln B_γ` for a fitted model: `0` for the null model, an error for a
    /// perfect fit unless `perfect_fit_is_infinite` is set, in which case `+∞`.
    pub fn log_bayes_factor_for_fit(&self, fit: &FitStatistics<T>, perfect_fit_is_infinite: bool) -> Result<T> {
        if fit.dim == 0 {
            return Ok(T::zero());
        }
        if fit.is_degenerate() {
            return if perfect_fit_is_infinite {
                Ok(T::infinity())
            } else {
                Err(Error::DegenerateFit { model: format!("of dimension {}", fit.dim) })
            };
        }
        self.log_bayes_factor(&BayesFactorInput::from_fit(fit))
    }
}

/// `ln h(v) = (dim/2) ln v - a ln(v + g0 q) + b ln(v + g0)`.
struct LogIntegrand<T> {
    half_dim: T,
    a: T,
    b: T,
    g0: T,
    g0q: T,
}

impl<T: Real> LogIntegrand<T> {
    fn new(input: &BayesFactorInput<T>) -> Self {
        let half = T::lit(0.5);
        let g0 = input.g0();
        let q = input.q.min(T::one());
        LogIntegrand {
            half_dim: half * T::of(input.dim),
            a: half * T::of(input.n - input.k0),
            b: half * T::of(input.n - input.k0 - input.dim),
            g0,
            g0q: g0 * q,
        }
    }

    #[inline]
    fn eval(&self, v: T, ln_v: T) -> T {
        self.half_dim * ln_v - self.a * (v + self.g0q).ln() + self.b * (v + self.g0).ln()
    }
}

/// `ln B_γ` with the default engine.
pub fn log_bayes_factor<T: Real>(input: &BayesFactorInput<T>) -> Result<T> {
    BayesFactorEngine::default().log_bayes_factor(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::{integrate_adaptive, integrate_to_infinity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bf(n: usize, k0: usize, dim: usize, q: f64) -> f64 {
        log_bayes_factor(&BayesFactorInput::new(n, k0, dim, q)).unwrap()
    }

    /// Untransformed integral in `g`, split at `2 g0`; the `(g - g0)^{-1/2}`
    /// singularity is removed with `g = g0 + s²` on the first piece.
    fn oracle(n: usize, k0: usize, dim: usize, q: f64) -> f64 {
        let g0 = (n - k0) as f64 / (dim + 1) as f64;
        let a = (n - k0) as f64 / 2.0;
        let b = (n - dim - k0) as f64 / 2.0;
        let ln_f = |g: f64| -a * (1.0 + g * q).ln() + b * (1.0 + g).ln();
        let spec = QuadratureSpec::adaptive(0.0, 1e-13);
        // Scale by the integrand at g0 to keep values in range.
        let scale = ln_f(2.0 * g0).max(ln_f(g0));
        let near = integrate_adaptive(
            |s: f64| {
                let g = g0 + s * s;
                (ln_f(g) - scale).exp() * 2.0 * g0.sqrt() / (std::f64::consts::PI * g)
            },
            0.0,
            g0.sqrt(),
            &spec,
        )
        .unwrap()
        .value;
        let far = integrate_to_infinity(
            |g: f64| (ln_f(g) - scale).exp() * mixing_density(g, n, k0, dim).unwrap(),
            2.0 * g0,
            &spec,
        )
        .unwrap()
        .value;
        scale + (near + far).ln()
    }

    #[test]
    fn mixing_density_normalizes() {
        // g = g0 + s² removes the endpoint singularity; the tail decays like s^{-2}.
        let spec = QuadratureSpec::adaptive(0.0, 1e-12);
        for n in [10usize, 50, 200, 1000] {
            for (k0, dim) in [(1usize, 1usize), (1, 3), (2, 5), (3, 8), (1, 9)] {
                let g0 = (n - k0) as f64 / (dim + 1) as f64;
                let total = integrate_to_infinity(
                    |s: f64| mixing_density(g0 + s * s, n, k0, dim).unwrap() * 2.0 * s,
                    0.0,
                    &spec,
                )
                .unwrap()
                .value;
                assert!((total - 1.0).abs() < 1e-8, "({n},{k0},{dim}): {total}");
            }
        }
    }

    #[test]
    fn transformed_density_is_arcsine() {
        let (n, k0, dim) = (50usize, 1usize, 3usize);
        let g0 = 49.0f64 / 4.0;
        for i in 1..=20 {
            let v = i as f64 / 21.0;
            let g = g0 / v;
            let transformed = mixing_density(g, n, k0, dim).unwrap() * g0 / (v * v);
            let arcsine = 1.0 / (std::f64::consts::PI * (v * (1.0 - v)).sqrt());
            assert!((transformed / arcsine - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixing_density_decay() {
        let g0 = 49.0f64 / 4.0;
        let g = 1e6 * g0;
        let lead = g0.sqrt() / std::f64::consts::PI * g.powf(-1.5);
        let v = mixing_density(g, 50, 1, 3).unwrap();
        assert!((v / lead - 1.0).abs() < 0.05);
        assert!(mixing_density(g0, 50, 1, 3).is_err());
    }

    #[test]
    fn no_improvement_is_penalized() {
        // Monte Carlo over v ~ Beta(1/2, 1/2) as an independent check.
        let (n, k0, dim) = (50usize, 1usize, 3usize);
        let g0 = 49.0f64 / 4.0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 10_000_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let u: f64 = rng.random();
            let v = (std::f64::consts::FRAC_PI_2 * u).sin().powi(2);
            let g = g0 / v;
            acc += (1.0 + g).powf(-(dim as f64) / 2.0);
        }
        let mc = acc / draws as f64;
        let got = bf(n, k0, dim, 1.0).exp();
        assert!(got < 1.0);
        assert!((got - mc).abs() < 1e-3, "{got} vs {mc}");
    }

    #[test]
    fn larger_residual_ratio_lowers_the_bayes_factor() {
        assert!(bf(30, 1, 2, 0.3) >= bf(30, 1, 2, 0.6));
    }

    #[test]
    fn reference_value_matches_oracle() {
        let got = bf(20, 1, 1, 0.5);
        let want = oracle(20, 1, 1, 0.5);
        assert!(((got - want) / want).abs() < 1e-7 || (got - want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn matches_oracle_across_regimes() {
        for &(n, k0, dim, q) in &[
            (10usize, 1usize, 1usize, 0.9f64),
            (50, 1, 3, 0.2),
            (100, 2, 10, 0.5),
            (300, 1, 20, 0.05),
            (1000, 1, 2, 0.99),
            (2000, 3, 40, 0.3),
            (40, 1, 38, 0.5),
        ] {
            let got = bf(n, k0, dim, q);
            let want = oracle(n, k0, dim, q);
            assert!((got - want).abs() <= 1e-7 * want.abs().max(1.0), "{n},{k0},{dim},{q}: {got} vs {want}");
        }
    }

    #[test]
    fn exact_at_null_and_perfect_fit() {
        let engine = BayesFactorEngine::<f64>::default();
        let null = FitStatistics { sse_gamma: 2.0, sse_null: 2.0, n: 10, k0: 1, dim: 0 };
        assert_eq!(engine.log_bayes_factor_for_fit(&null, false).unwrap(), 0.0);
        let perfect = FitStatistics { sse_gamma: 0.0, sse_null: 2.0, n: 10, k0: 1, dim: 2 };
        assert!(matches!(engine.log_bayes_factor_for_fit(&perfect, false), Err(Error::DegenerateFit { .. })));
        assert_eq!(engine.log_bayes_factor_for_fit(&perfect, true).unwrap(), f64::INFINITY);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(log_bayes_factor(&BayesFactorInput::new(5, 1, 4, 0.5f64)).is_err());
        assert!(log_bayes_factor(&BayesFactorInput::new(50, 1, 2, 0.0f64)).is_err());
        assert!(log_bayes_factor(&BayesFactorInput::new(50, 1, 0, 0.5f64)).is_err());
    }

    #[test]
    fn posterior_is_a_sum_of_logs() {
        assert_eq!(log_posterior_unnormalized(0.0, 0.5f64.ln()), 0.5f64.ln());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (a, b): (f64, f64) = (rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>().ln());
            let direct = a.exp() * b.exp();
            assert!((log_posterior_unnormalized(a, b).exp() - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn single_precision_runs() {
        let v = log_bayes_factor(&BayesFactorInput::new(50, 1, 3, 0.3f32)).unwrap();
        let w = bf(50, 1, 3, 0.3);
        assert!((v as f64 - w).abs() < 1e-3, "{v} vs {w}");
    }
}
