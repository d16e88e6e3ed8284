//! Model-space prior families.
//!
//! Every family assigns the same probability to all models of a given
//! dimension, so a prior is fully described by its per-model log
//! probability as a function of `(k, d)`, or equivalently by the dimension
//! masses `𝔐(d) = C(k, d) Pr(M_γ : |γ| = d)`.

pub mod approx;
pub mod cmg;
pub mod half_k;
pub mod hier_beta;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::log_choose;
use crate::numerics::quadrature::QuadratureSpec;
use crate::numerics::special::{harmonic_number, ln_regularized_incomplete_beta, log_beta};
use crate::numerics::{log_sum_exp, LogSumExp};
use crate::scalar::Real;

pub use approx::{approx_inclusion_probability, approx_log_dimension_mass};
pub use cmg::cmg_lambda_density;
pub use half_k::half_k_constants;
pub use hier_beta::hierarchical_beta_density;

/// Default rate of the exponential family.
pub const EXPONENTIAL_DEFAULT_RATE: f64 = 1.2785;

/// Rate `c` of the exponential family `Pr(M_γ) ∝ e^{-c|γ|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExponentialRate<T> {
    Fixed(T),
    /// `c = ln k`.
    LogK,
}

impl<T: Real> ExponentialRate<T> {
    pub fn value(&self, k: usize) -> T {
        match *self {
            ExponentialRate::Fixed(c) => c,
            ExponentialRate::LogK => T::of(k).ln(),
        }
    }
}

/// The prior families, with their hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorKind<T> {
    /// `Pr(M_γ) = 2^{-k}`.
    Uniform,
    /// Uniform mixing density on the common inclusion probability.
    Jeffreys,
    /// Dimension masses proportional to `1/(1 + d)`.
    Harmonic,
    /// Poisson model size with intrinsic prior on the rate.
    Cmg,
    /// Uniform mixing density on `(0, (k+1)/(2k))`.
    HalfP,
    /// Jeffreys up to `k/2`, flat above, continuously joined.
    HalfK,
    /// `Beta(a, b)` mixing density.
    BetaBinomial { a: T, b: T },
    /// Beta(1, α) mixing density with `α ~ α^{-3/2}/2` on `(1, ∞)`.
    HierarchicalBeta,
    /// `Pr(M_γ) ∝ e^{-c|γ|}` over all `2^k` models.
    Exponential(ExponentialRate<T>),
}

/// A prior family together with the quadrature used by the families that
/// need numerical integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorFamily<T> {
    pub kind: PriorKind<T>,
    pub quadrature: QuadratureSpec<T>,
}

impl<T: Real> From<PriorKind<T>> for PriorFamily<T> {
    fn from(kind: PriorKind<T>) -> Self {
        PriorFamily::new(kind)
    }
}

impl<T: Real> PriorFamily<T> {
    pub fn new(kind: PriorKind<T>) -> Self {
        PriorFamily { kind, quadrature: QuadratureSpec::default() }
    }

    pub fn uniform() -> Self {
        Self::new(PriorKind::Uniform)
    }
    pub fn jeffreys() -> Self {
        Self::new(PriorKind::Jeffreys)
    }
    pub fn harmonic() -> Self {
        Self::new(PriorKind::Harmonic)
    }
    pub fn cmg() -> Self {
        Self::new(PriorKind::Cmg)
    }
    pub fn half_p() -> Self {
        Self::new(PriorKind::HalfP)
    }
    pub fn half_k() -> Self {
        Self::new(PriorKind::HalfK)
    }
    pub fn beta_binomial(a: T, b: T) -> Self {
        Self::new(PriorKind::BetaBinomial { a, b })
    }
    /// `Beta(1, 2)` mixing density.
    pub fn beta_1_2() -> Self {
        Self::beta_binomial(T::one(), T::lit(2.0))
    }
    pub fn hierarchical_beta() -> Self {
        Self::new(PriorKind::HierarchicalBeta)
    }
    pub fn exponential(rate: ExponentialRate<T>) -> Self {
        Self::new(PriorKind::Exponential(rate))
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureSpec<T>) -> Self {
        self.quadrature = quadrature;
        self
    }

    /// The eight families compared graphically, in legend order:
    /// Half-p, Jeffreys, Uniform, Half-k, CMG, Hierarchical, Beta(1,2), Harmonic.
    pub fn figure_families() -> Vec<Self> {
        vec![
            Self::half_p(),
            Self::jeffreys(),
            Self::uniform(),
            Self::half_k(),
            Self::cmg(),
            Self::hierarchical_beta(),
            Self::beta_1_2(),
            Self::harmonic(),
        ]
    }

    /// The figure families plus the exponential family at its default rate.
    pub fn all_families() -> Vec<Self> {
        let mut v = Self::figure_families();
        v.push(Self::exponential(ExponentialRate::Fixed(T::lit(EXPONENTIAL_DEFAULT_RATE))));
        v
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PriorKind::BetaBinomial { a, b } if !(a > T::zero() && b > T::zero()) => Err(
                Error::InvalidArgument(format!("beta-binomial needs a, b > 0, got a={a}, b={b}")),
            ),
            PriorKind::Exponential(ExponentialRate::Fixed(c)) if !(c > T::zero()) => {
                Err(Error::InvalidArgument(format!("exponential rate must be > 0, got {c}")))
            }
            _ => Ok(()),
        }
    }

    fn needs_quadrature(&self) -> bool {
        matches!(self.kind, PriorKind::Cmg | PriorKind::HierarchicalBeta)
    }

    /// Per-model log prior `ln Pr(M_γ)` for each dimension `d = 0..=k`.
    pub fn log_per_model(&self, k: usize) -> Result<Vec<T>> {
        self.validate()?;
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        match self.kind {
            PriorKind::Cmg => {
                let ln_m: Vec<T> = (0..=k)
                    .map(|d| cmg::ln_poisson_mixture_mass(d, &self.quadrature))
                    .collect::<Result<_>>()?;
                let ln_total = log_sum_exp(&ln_m);
                (0..=k).map(|d| Ok(ln_m[d] - ln_total - log_choose::<T>(k, d)?)).collect()
            }
            PriorKind::HalfK => half_k::log_per_model(k),
            _ => (0..=k).map(|d| self.log_prior_model(k, d)).collect(),
        }
    }

    /// `ln Pr(M_γ)` for any model with `|γ| = d` among `k` candidates.
    pub fn log_prior_model(&self, k: usize, d: usize) -> Result<T> {
        self.validate()?;
        if k == 0 || d > k {
            return Err(Error::domain("log_prior_model", format!("need 0 <= d <= k, k >= 1; got k={k}, d={d}")));
        }
        let kt = T::of(k);
        let dt = T::of(d);
        let one = T::one();
        match self.kind {
            PriorKind::Uniform => Ok(-kt * T::LN_2()),
            PriorKind::Jeffreys => beta_mixture(one, one, k, d),
            PriorKind::BetaBinomial { a, b } => beta_mixture(a, b, k, d),
            PriorKind::Harmonic => {
                Ok(-(dt + one).ln() - log_choose::<T>(k, d)? - harmonic_number::<T>(k + 1).ln())
            }
            PriorKind::HalfP => {
                let upper = half_p_upper_limit::<T>(k);
                let (a, b) = (dt + one, kt - dt + one);
                Ok(-upper.ln() + log_beta(a, b)? + ln_regularized_incomplete_beta(upper, a, b)?)
            }
            PriorKind::HierarchicalBeta => hier_beta::ln_model_integral(k, d, &self.quadrature),
            PriorKind::Exponential(rate) => {
                let c = rate.value(k);
                Ok(-c * dt - kt * (-c).exp().ln_1p())
            }
            PriorKind::Cmg | PriorKind::HalfK => Ok(self.log_per_model(k)?[d]),
        }
    }

    /// Dimension masses `𝔐(0..=k)`.
    pub fn dimension_mass(&self, k: usize) -> Result<DimensionMass<T>> {
        DimensionMass::from_per_model(&self.log_per_model(k)?)
    }

    /// Prior inclusion probability of any single variable, `E^𝔐[d] / k`.
    pub fn prior_inclusion_probability(&self, k: usize) -> Result<T> {
        Ok(self.dimension_mass(k)?.inclusion_probability())
    }

    /// `E^𝔐[d | d >= 1] / k`: the inclusion probability with the null
    /// model's mass removed before normalizing.
    pub fn zero_truncated_inclusion_probability(&self, k: usize) -> Result<T> {
        Ok(self.dimension_mass(k)?.zero_truncated_inclusion_probability())
    }

    /// Mean of the mixing density on `p` for the mixture-over-`p` families.
    pub fn mixing_mean(&self, k: usize) -> Option<T> {
        let half = T::lit(0.5);
        match self.kind {
            PriorKind::Uniform | PriorKind::Jeffreys => Some(half),
            PriorKind::BetaBinomial { a, b } => Some(a / (a + b)),
            PriorKind::HalfP => Some(half * half_p_upper_limit::<T>(k)),
            PriorKind::HierarchicalBeta => Some(hier_beta::mixing_mean()),
            _ => None,
        }
    }

    /// Mixing density `π(p)` on the common inclusion probability, for the
    /// families that are mixtures over `p` with a density.
    pub fn mixing_density(&self, k: usize, p: T) -> Option<Result<T>> {
        if !(p > T::zero() && p < T::one()) {
            return Some(Err(Error::domain("mixing_density", format!("p = {p} outside (0, 1)"))));
        }
        match self.kind {
            PriorKind::Jeffreys => Some(Ok(T::one())),
            PriorKind::BetaBinomial { a, b } => Some(log_beta(a, b).map(|lb| {
                ((a - T::one()) * p.ln() + (b - T::one()) * (-p).ln_1p() - lb).exp()
            })),
            PriorKind::HalfP => {
                let u = half_p_upper_limit::<T>(k);
                Some(Ok(if p <= u { u.recip() } else { T::zero() }))
            }
            PriorKind::HierarchicalBeta => Some(hierarchical_beta_density(p)),
            _ => None,
        }
    }

    /// Precomputes the per-model log priors for a fixed `k`.
    pub fn prepare(&self, k: usize) -> Result<PreparedPrior<T>> {
        Ok(PreparedPrior { family: *self, k, log_per_model: self.log_per_model(k)? })
    }

    /// Short lowercase name used on the command line and in tables.
    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn uses_quadrature(&self) -> bool {
        self.needs_quadrature()
    }
}

/// Upper end `(k+1)/(2k)` of the Half-p mixing interval.
pub fn half_p_upper_limit<T: Real>(k: usize) -> T {
    let kt = T::of(k);
    (kt + T::one()) / (kt + kt)
}

/// `ln ∫ p^d (1-p)^{k-d} Beta(p | a, b) dp = ln B(a + d, b + k - d) - ln B(a, b)`.
fn beta_mixture<T: Real>(a: T, b: T, k: usize, d: usize) -> Result<T> {
    let (kt, dt) = (T::of(k), T::of(d));
    Ok(log_beta(a + dt, b + kt - dt)? - log_beta(a, b)?)
}

/// Per-model log priors for a fixed `k`; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPrior<T> {
    family: PriorFamily<T>,
    k: usize,
    log_per_model: Vec<T>,
}

impl<T: Real> PreparedPrior<T> {
    pub fn family(&self) -> &PriorFamily<T> {
        &self.family
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `ln Pr(M_γ)` for `|γ| = d`.
    pub fn log_prior(&self, d: usize) -> T {
        self.log_per_model[d]
    }

    pub fn log_per_model(&self) -> &[T] {
        &self.log_per_model
    }

    pub fn dimension_mass(&self) -> Result<DimensionMass<T>> {
        DimensionMass::from_per_model(&self.log_per_model)
    }

    /// Rebuilds a prepared prior from cached per-model values.
    pub fn from_cached(family: PriorFamily<T>, log_per_model: Vec<T>) -> Result<Self> {
        if log_per_model.len() < 2 {
            return Err(Error::InvalidArgument("cached prior needs k + 1 >= 2 entries".into()));
        }
        let k = log_per_model.len() - 1;
        Ok(PreparedPrior { family, k, log_per_model })
    }
}

/// Total prior probability `𝔐(d)` of the models of each dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionMass<T> {
    pub k: usize,
    pub mass: Vec<T>,
    /// `ln 𝔐(d)`, finite where `mass` underflows.
    pub log_mass: Vec<T>,
}

impl<T: Real> DimensionMass<T> {
    pub fn from_log(k: usize, log_mass: Vec<T>) -> Self {
        let mass = log_mass.iter().map(|v| v.exp()).collect();
        DimensionMass { k, mass, log_mass }
    }

    /// Masses from per-model log priors `ln Pr(M_γ)`, `d = 0..=k`.
    pub fn from_per_model(log_per_model: &[T]) -> Result<Self> {
        let k = log_per_model.len().saturating_sub(1);
        let log_mass = log_per_model
            .iter()
            .enumerate()
            .map(|(d, &lp)| Ok(lp + log_choose::<T>(k, d)?))
            .collect::<Result<_>>()?;
        Ok(Self::from_log(k, log_mass))
    }

    /// `E^𝔐[d] / k`.
    pub fn inclusion_probability(&self) -> T {
        self.mean_dimension() / T::of(self.k)
    }

    /// `E^𝔐[d | d >= 1] / k`.
    pub fn zero_truncated_inclusion_probability(&self) -> T {
        let mut num = LogSumExp::default();
        let mut den = LogSumExp::default();
        for d in 1..=self.k {
            num.add(self.log_mass[d] + T::of(d).ln());
            den.add(self.log_mass[d]);
        }
        (num.value() - den.value()).exp() / T::of(self.k)
    }

    pub fn total(&self) -> T {
        log_sum_exp(&self.log_mass).exp()
    }

    /// `E^𝔐[d]`, normalized by the total mass.
    pub fn mean_dimension(&self) -> T {
        let mut num = LogSumExp::default();
        for d in 1..=self.k {
            num.add(self.log_mass[d] + T::of(d).ln());
        }
        (num.value() - log_sum_exp(&self.log_mass)).exp()
    }
}

impl<T: Real> fmt::Display for PriorKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorKind::Uniform => f.write_str("uniform"),
            PriorKind::Jeffreys => f.write_str("jeffreys"),
            PriorKind::Harmonic => f.write_str("harmonic"),
            PriorKind::Cmg => f.write_str("cmg"),
            PriorKind::HalfP => f.write_str("half-p"),
            PriorKind::HalfK => f.write_str("half-k"),
            PriorKind::BetaBinomial { a, b } => write!(f, "beta-binomial:{a}:{b}"),
            PriorKind::HierarchicalBeta => f.write_str("hier-beta"),
            PriorKind::Exponential(ExponentialRate::Fixed(c)) => write!(f, "exp:{c}"),
            PriorKind::Exponential(ExponentialRate::LogK) => f.write_str("exp:logk"),
        }
    }
}

impl<T: Real> fmt::Display for PriorFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl<T: Real> FromStr for PriorKind<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!(
            "unknown prior '{s}'; expected uniform, jeffreys, harmonic, cmg, half-p, half-k, \
             beta-binomial:a:b, hier-beta or exp:c"
        ));
        let num = |t: &str| -> Result<T> {
            t.parse::<f64>().ok().and_then(T::from_f64).ok_or_else(bad)
        };
        let lower = s.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split(':').collect();
        let kind = match parts.as_slice() {
            ["uniform"] => PriorKind::Uniform,
            ["jeffreys"] => PriorKind::Jeffreys,
            ["harmonic"] => PriorKind::Harmonic,
            ["cmg"] => PriorKind::Cmg,
            ["half-p"] => PriorKind::HalfP,
            ["half-k"] => PriorKind::HalfK,
            ["hier-beta"] => PriorKind::HierarchicalBeta,
            ["beta-binomial", a, b] => PriorKind::BetaBinomial { a: num(a)?, b: num(b)? },
            ["exp"] => PriorKind::Exponential(ExponentialRate::Fixed(T::lit(EXPONENTIAL_DEFAULT_RATE))),
            ["exp", "logk"] => PriorKind::Exponential(ExponentialRate::LogK),
            ["exp", c] => PriorKind::Exponential(ExponentialRate::Fixed(num(c)?)),
            _ => return Err(bad()),
        };
        PriorFamily::new(kind).validate()?;
        Ok(kind)
    }
}

impl<T: Real> FromStr for PriorFamily<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<PriorKind<T>>().map(PriorFamily::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn jeffreys_full_model_at_47() {
        let v = PriorFamily::<f64>::jeffreys().log_prior_model(47, 47).unwrap();
        assert!(close(v, -(48f64).ln(), 1e-12));
    }

    #[test]
    fn uniform_is_flat() {
        for d in 0..=10 {
            let v = PriorFamily::<f64>::uniform().log_prior_model(10, d).unwrap();
            assert!(close(v, -10.0 * 2f64.ln(), 1e-14));
        }
    }

    #[test]
    fn beta_1_2_null_model_k1() {
        // 2 ∫ (1-p)^2 dp = 2/3
        let v = PriorFamily::<f64>::beta_1_2().log_prior_model(1, 0).unwrap();
        assert!(close(v, (2.0f64 / 3.0).ln(), 1e-14));
    }

    #[test]
    fn harmonic_k2_d1() {
        let expect = (0.5f64 / (2.0 * (1.0 + 0.5 + 1.0 / 3.0))).ln();
        let v = PriorFamily::<f64>::harmonic().log_prior_model(2, 1).unwrap();
        assert!(close(v, expect, 1e-14));
    }

    #[test]
    fn jeffreys_shares_beta_binomial_path() {
        let j = PriorFamily::<f64>::jeffreys();
        let bb = PriorFamily::<f64>::beta_binomial(1.0, 1.0);
        for k in [1usize, 7, 30] {
            for d in 0..=k {
                let (a, b) = (j.log_prior_model(k, d).unwrap(), bb.log_prior_model(k, d).unwrap());
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn jeffreys_masses_are_flat() {
        let dm = PriorFamily::<f64>::jeffreys().dimension_mass(9).unwrap();
        for m in dm.mass {
            assert!(close(m, 0.1, 1e-13));
        }
    }

    #[test]
    fn beta_1_2_mass_formula() {
        let dm = PriorFamily::<f64>::beta_1_2().dimension_mass(8).unwrap();
        assert!(close(dm.mass[3], 2.0 / 15.0, 1e-13));
    }

    #[test]
    fn cmg_null_mass_large_k() {
        let dm = PriorFamily::<f64>::cmg().dimension_mass(1000).unwrap();
        let target = (-0.5f64).exp() / 2f64.sqrt();
        assert!(close(dm.mass[0], target, 1e-9), "{}", dm.mass[0]);
    }

    #[test]
    fn inclusion_probabilities() {
        let j = PriorFamily::<f64>::jeffreys();
        for k in [1usize, 4, 50] {
            assert!(close(j.prior_inclusion_probability(k).unwrap(), 0.5, 1e-12));
        }
        let hb = PriorFamily::<f64>::hierarchical_beta();
        assert!(close(hb.prior_inclusion_probability(30).unwrap(), 1.0 - std::f64::consts::FRAC_PI_4, 1e-6));
        let h = PriorFamily::<f64>::harmonic();
        assert!(close(h.prior_inclusion_probability(5).unwrap(), 0.29, 0.005));
        let hp = PriorFamily::<f64>::half_p();
        assert!(close(hp.prior_inclusion_probability(9).unwrap(), 10.0 / 36.0, 1e-12));
    }

    #[test]
    fn harmonic_inclusion_identity() {
        for k in 1..=60usize {
            let kf = k as f64;
            let h: f64 = harmonic_number(k + 1);
            let identity = (1.0 + 1.0 / kf) / h - 1.0 / kf;
            let got = PriorFamily::<f64>::harmonic().prior_inclusion_probability(k).unwrap();
            assert!((got - identity).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn exponential_normalizes_in_closed_form() {
        let fam = PriorFamily::<f64>::exponential(ExponentialRate::LogK);
        let dm = fam.dimension_mass(25).unwrap();
        assert!((dm.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["uniform", "jeffreys", "harmonic", "cmg", "half-p", "half-k", "hier-beta",
                  "beta-binomial:1:2", "exp:1.2785", "exp:logk"] {
            let f: PriorFamily<f64> = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("beta-binomial:0:2".parse::<PriorFamily<f64>>().is_err());
        assert!("nope".parse::<PriorFamily<f64>>().is_err());
        assert!("exp:-1".parse::<PriorFamily<f64>>().is_err());
    }

    #[test]
    fn invalid_dimension_rejected() {
        assert!(PriorFamily::<f64>::jeffreys().log_prior_model(3, 4).is_err());
        assert!(PriorFamily::<f64>::jeffreys().log_prior_model(0, 0).is_err());
    }
}
