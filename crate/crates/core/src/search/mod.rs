//! Posterior summaries over the model space: exact enumeration,
//! branch-and-bound best subsets, the highest posterior model through the
//! per-dimension profile, and a Gibbs sampler for large `k`.

mod bnb;
mod exact;
mod gibbs;

use std::cmp::Ordering;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bayes_factor::BayesFactorEngine;
use crate::error::{Error, Result};
use crate::glm::Dataset;
use crate::model_space::{ModelIndicator, DEFAULT_ENUMERATION_CAP};
use crate::priors::{PreparedPrior, PriorFamily};
use crate::scalar::Real;

pub use bnb::{best_subset_per_dimension, hpm_via_profile, DimensionProfile};
pub use exact::{exact_posterior, model_log_posteriors};
pub use gibbs::{gibbs_posterior, GibbsOptions};

/// Default largest `k` handled by branch and bound.
pub const DEFAULT_BNB_CAP: usize = 50;

/// How a [`PosteriorSummary`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Gibbs,
}

/// Settings shared by the search routines.
#[derive(Debug, Clone)]
pub struct SearchOptions<T> {
    pub enumeration_cap: usize,
    pub bnb_cap: usize,
    /// Give models with zero residual an infinite Bayes factor instead of failing.
    pub perfect_fit_is_infinite: bool,
    /// Wall-clock limit for branch and bound.
    pub bnb_deadline: Option<Duration>,
    pub engine: BayesFactorEngine<T>,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        SearchOptions {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            bnb_cap: DEFAULT_BNB_CAP,
            perfect_fit_is_infinite: false,
            bnb_deadline: None,
            engine: BayesFactorEngine::default(),
        }
    }
}

/// Posterior inclusion probabilities, HPM and MPM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary<T> {
    pub method: Method,
    pub inclusion_probs: Vec<T>,
    pub hpm: ModelIndicator,
    /// Unnormalized log posterior `ln B + ln Pr` of the HPM.
    pub hpm_log_posterior: T,
    /// False when the HPM is only the best model the sampler visited.
    pub hpm_is_exact: bool,
    pub mpm: ModelIndicator,
    /// `ln Σ_γ B_γ Pr(M_γ)`, exact mode only.
    pub log_normalizer: Option<T>,
    pub mc_standard_errors: Option<Vec<T>>,
    /// Models skipped because their fit was exact.
    pub skipped_models: u64,
}

/// Model with bit `j` set iff `inclusion_probs[j] > 0.5`.
pub fn mpm_from_inclusions<T: Real>(inclusion_probs: &[T]) -> ModelIndicator {
    let half = T::lit(0.5);
    let bits: Vec<bool> = inclusion_probs.iter().map(|&p| p > half).collect();
    ModelIndicator::from_bools(&bits)
}

/// Orders candidate HPMs: higher log posterior, then smaller dimension, then
/// lexicographically smaller mask.
pub(crate) fn hpm_order<T: Real>(a: (T, &ModelIndicator), b: (T, &ModelIndicator)) -> Ordering {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Greater) => Ordering::Less,
        Some(Ordering::Less) => Ordering::Greater,
        _ => a.1.parsimony_cmp(b.1),
    }
}

/// Log posterior of a model given its SSE: `ln B_γ + ln Pr(M_γ)`.
pub(crate) struct Scorer<'a, T> {
    pub data: &'a Dataset<T>,
    pub prior: PreparedPrior<T>,
    pub engine: &'a BayesFactorEngine<T>,
    pub perfect_fit_is_infinite: bool,
}

impl<'a, T: Real> Scorer<'a, T> {
    pub fn new(data: &'a Dataset<T>, family: &PriorFamily<T>, opts: &'a SearchOptions<T>) -> Result<Self> {
        Ok(Scorer {
            data,
            prior: family.prepare(data.k())?,
            engine: &opts.engine,
            perfect_fit_is_infinite: opts.perfect_fit_is_infinite,
        })
    }

    pub fn log_bf(&self, sse: T, dim: usize) -> Result<T> {
        let fit = self.data.stats(sse, dim);
        self.engine.log_bayes_factor_for_fit(&fit, self.perfect_fit_is_infinite)
    }

    pub fn log_posterior(&self, sse: T, dim: usize) -> Result<T> {
        Ok(crate::bayes_factor::log_posterior_unnormalized(self.log_bf(sse, dim)?, self.prior.log_prior(dim)))
    }
}

/// Picks exact enumeration when `k` is within the enumeration cap and Gibbs
/// sampling otherwise. On the Gibbs path the HPM is replaced by the exact
/// profile HPM when `k` is within the branch-and-bound cap.
pub fn posterior_auto<T: Real>(
    data: &Dataset<T>,
    family: &PriorFamily<T>,
    gibbs: &GibbsOptions,
    opts: &SearchOptions<T>,
) -> Result<PosteriorSummary<T>> {
    if data.k() <= opts.enumeration_cap {
        return exact_posterior(data, family, opts);
    }
    let mut summary = gibbs_posterior(data, family, gibbs, opts)?;
    if data.k() <= opts.bnb_cap {
        let profile = best_subset_per_dimension(data, opts)?;
        if profile.is_complete() {
            let (hpm, lp) = hpm_via_profile(&profile, family, data, opts)?;
            summary.hpm = hpm;
            summary.hpm_log_posterior = lp;
            summary.hpm_is_exact = true;
        } else {
            log::warn!("branch and bound timed out; keeping the best model visited by the sampler");
        }
    }
    Ok(summary)
}

pub(crate) fn check_k(k: usize, cap: usize, what: &'static str, hint: &'static str) -> Result<()> {
    if k > cap {
        return Err(Error::Capacity { what, k, cap, hint });
    }
    Ok(())
}
