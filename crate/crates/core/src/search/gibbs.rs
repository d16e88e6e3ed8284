use std::cmp::Ordering;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hpm_order, mpm_from_inclusions, Method, PosteriorSummary, Scorer, SearchOptions};
use crate::error::{Error, Result};
use crate::glm::{Dataset, SubsetFit};
use crate::model_space::ModelIndicator;
use crate::priors::PriorFamily;
use crate::scalar::Real;

const CACHE_LIMIT: usize = 1 << 20;

/// Settings for the Gibbs sampler over model space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GibbsOptions {
    /// Total sweeps per chain, including burn-in.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Independent chains, each on its own stream of the seeded generator.
    pub chains: usize,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions { iterations: 20_000, burn_in: 2_000, seed: 1, chains: 1 }
    }
}

impl GibbsOptions {
    pub fn new(iterations: usize, burn_in: usize, seed: u64) -> Self {
        GibbsOptions { iterations, burn_in, seed, chains: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.chains == 0 {
            return Err(Error::InvalidArgument("at least one chain is required".into()));
        }
        Ok(())
    }
}

struct ChainOutput<T> {
    /// Per-variable sums of the conditional inclusion probabilities, one row per batch.
    batches: Vec<Vec<f64>>,
    batch_len: usize,
    best: (T, ModelIndicator),
    skipped: u64,
}

struct Chain<'s, 'd, T> {
    scorer: &'s Scorer<'d, T>,
    cache: HashMap<ModelIndicator, T>,
    skipped: u64,
}

impl<T: Real> Chain<'_, '_, T> {
    fn log_posterior(&mut self, m: &ModelIndicator, sse: impl FnOnce() -> Result<T>) -> Result<T> {
        if let Some(&lp) = self.cache.get(m) {
            return Ok(lp);
        }
        let lp = match self.scorer.log_posterior(sse()?, m.dimension()) {
            Ok(lp) => lp,
            Err(Error::DegenerateFit { .. }) => {
                if self.skipped == 0 {
                    log::warn!("model {m} fits the data exactly; treating it as having zero posterior mass");
                }
                self.skipped += 1;
                T::neg_infinity()
            }
            Err(e) => return Err(e),
        };
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(m.clone(), lp);
        Ok(lp)
    }
}

fn run_chain<T: Real>(scorer: &Scorer<'_, T>, opts: &GibbsOptions, stream: u64) -> Result<ChainOutput<T>> {
    let data = scorer.data;
    let k = data.k();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(stream);
    let mut chain = Chain { scorer, cache: HashMap::new(), skipped: 0 };

    let kept = opts.iterations - opts.burn_in;
    let n_batches = ((kept as f64).sqrt().floor() as usize).max(1);
    let batch_len = kept / n_batches;
    let mut batches = vec![vec![0.0f64; k]; n_batches];

    let mut model = ModelIndicator::null(k);
    let mut fit = SubsetFit::new(data);
    let mut lp = chain.log_posterior(&model, || Ok(fit.sse()))?;
    let mut best = (lp, model.clone());

    for sweep in 0..opts.iterations {
        let batch = sweep.checked_sub(opts.burn_in).map(|t| t / batch_len).filter(|&b| b < n_batches);
        for j in 0..k {
            let other = model.toggled(j);
            let lp_other = if model.contains(j) {
                chain.log_posterior(&other, || fit.sse_without(j))?
            } else {
                chain.log_posterior(&other, || fit.sse_with(j))?
            };
            let (lp0, lp1) = if model.contains(j) { (lp_other, lp) } else { (lp, lp_other) };
            let p1 = if lp0 == lp1 { 0.5 } else { 1.0 / (1.0 + (lp0 - lp1).as_f64().exp()) };
            if let Some(b) = batch {
                batches[b][j] += p1;
            }
            let include = rng.random::<f64>() < p1;
            if include != model.contains(j) {
                if include {
                    fit.push(j)?;
                } else {
                    fit.remove(j)?;
                }
                model.set(j, include);
                lp = lp_other;
                if hpm_order((lp, &model), (best.0, &best.1)) == Ordering::Less {
                    best = (lp, model.clone());
                }
            }
        }
    }
    Ok(ChainOutput { batches, batch_len, best, skipped: chain.skipped })
}

/// Posterior summary from a systematic-scan Gibbs sampler started at the null model.
///
/// Inclusion probabilities are Rao-Blackwellized: the average, after burn-in,
/// of each variable's full conditional inclusion probability. Standard errors
/// use batch means with `⌊√T⌋` batches per chain. The HPM is the best model
/// visited and is not guaranteed to be the true HPM.
pub fn gibbs_posterior<T: Real>(
    data: &Dataset<T>,
    family: &PriorFamily<T>,
    gibbs: &GibbsOptions,
    opts: &SearchOptions<T>,
) -> Result<PosteriorSummary<T>> {
    gibbs.validate()?;
    let scorer = Scorer::new(data, family, opts)?;
    let chains: Vec<ChainOutput<T>> = (0..gibbs.chains as u64)
        .into_par_iter()
        .map(|c| run_chain(&scorer, gibbs, c))
        .collect::<Result<_>>()?;

    let k = data.k();
    let means: Vec<Vec<f64>> = chains
        .iter()
        .flat_map(|c| c.batches.iter().map(move |b| b.iter().map(|s| s / c.batch_len as f64).collect()))
        .collect();
    let nb = means.len() as f64;
    let mut inclusion = vec![0.0f64; k];
    for m in &means {
        for (acc, v) in inclusion.iter_mut().zip(m) {
            *acc += v / nb;
        }
    }
    let se: Vec<f64> = (0..k)
        .map(|j| {
            if means.len() < 2 {
                return f64::NAN;
            }
            let var = means.iter().map(|m| (m[j] - inclusion[j]).powi(2)).sum::<f64>() / (nb - 1.0);
            (var / nb).sqrt()
        })
        .collect();

    let inclusion_probs: Vec<T> = inclusion.iter().map(|&p| T::lit(p.clamp(0.0, 1.0))).collect();
    let (hpm_log_posterior, hpm) = chains
        .iter()
        .map(|c| (c.best.0, &c.best.1))
        .min_by(|a, b| hpm_order(*a, *b))
        .map(|(lp, m)| (lp, m.clone()))
        .expect("at least one chain");
    Ok(PosteriorSummary {
        method: Method::Gibbs,
        mpm: mpm_from_inclusions(&inclusion_probs),
        inclusion_probs,
        hpm,
        hpm_log_posterior,
        hpm_is_exact: false,
        log_normalizer: None,
        mc_standard_errors: Some(se.into_iter().map(T::lit).collect()),
        skipped_models: chains.iter().map(|c| c.skipped).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::exact_posterior;

    fn data() -> Dataset<f64> {
        let x: Vec<Vec<f64>> = (0..6)
            .map(|j| (0..40).map(|i| (((i * (2 * j + 3) + j) % 13) as f64 - 6.0) * 0.3 + (0.7 * (i + j) as f64).cos()).collect())
            .collect();
        let y = (0..40).map(|i| 0.6 * x[0][i] + 0.25 * x[4][i] + (((i * 5) % 7) as f64 - 3.0) * 0.4).collect();
        Dataset::with_intercept(y, x).unwrap()
    }

    #[test]
    fn agrees_with_enumeration() {
        let d = data();
        let opts = SearchOptions::default();
        let fam = PriorFamily::cmg();
        let exact = exact_posterior(&d, &fam, &opts).unwrap();
        let g = gibbs_posterior(&d, &fam, &GibbsOptions::new(20_000, 1_000, 11), &opts).unwrap();
        let se = g.mc_standard_errors.as_ref().unwrap();
        for j in 0..6 {
            let diff = (g.inclusion_probs[j] - exact.inclusion_probs[j]).abs();
            assert!(diff <= 4.0 * se[j] + 1e-9, "j={j} diff {diff} se {}", se[j]);
        }
        assert!(!g.hpm_is_exact);
        assert_eq!(g.method, Method::Gibbs);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let d = data();
        let opts = SearchOptions::default();
        let fam = PriorFamily::half_p();
        let mut g = GibbsOptions::new(2_000, 100, 5);
        g.chains = 3;
        let a = gibbs_posterior(&d, &fam, &g, &opts).unwrap();
        let b = gibbs_posterior(&d, &fam, &g, &opts).unwrap();
        assert_eq!(a, b);
        g.seed = 6;
        let c = gibbs_posterior(&d, &fam, &g, &opts).unwrap();
        assert_ne!(a.inclusion_probs, c.inclusion_probs);
    }

    #[test]
    fn rejects_burn_in_not_below_iterations() {
        let d = data();
        let err = gibbs_posterior(&d, &PriorFamily::uniform(), &GibbsOptions::new(10, 10, 1), &SearchOptions::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
