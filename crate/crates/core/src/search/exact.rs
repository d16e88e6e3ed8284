use rayon::prelude::*;

use super::{check_k, hpm_order, mpm_from_inclusions, Method, PosteriorSummary, Scorer, SearchOptions};
use crate::error::Result;
use crate::glm::{Dataset, SubsetFit};
use crate::model_space::{enumerate_models, ModelIndicator};
use crate::numerics::LogSumExp;
use crate::priors::PriorFamily;
use crate::scalar::Real;
use std::cmp::Ordering;

/// Number of high variables fixed per parallel task.
const SPLIT_BITS: usize = 6;

/// Log-space totals over a block of models.
///
/// Models with an infinite Bayes factor (only present when perfect fits are
/// allowed) dominate every finite one; they are tracked separately by prior weight.
#[derive(Debug, Clone)]
struct Accumulator<T> {
    total: LogSumExp<T>,
    included: Vec<LogSumExp<T>>,
    inf_total: LogSumExp<T>,
    inf_included: Vec<LogSumExp<T>>,
    best: Option<(T, ModelIndicator)>,
}

impl<T: Real> Accumulator<T> {
    fn new(k: usize) -> Self {
        Accumulator {
            total: LogSumExp::default(),
            included: vec![LogSumExp::default(); k],
            inf_total: LogSumExp::default(),
            inf_included: vec![LogSumExp::default(); k],
            best: None,
        }
    }

    fn add(&mut self, members: &[usize], lp: T, log_prior: T, model: impl FnOnce() -> ModelIndicator) {
        if lp == T::infinity() {
            self.inf_total.add(log_prior);
            for &j in members {
                self.inf_included[j].add(log_prior);
            }
        } else {
            self.total.add(lp);
            for &j in members {
                self.included[j].add(lp);
            }
        }
        let better = match &self.best {
            None => true,
            Some((b, bm)) => {
                if lp != *b {
                    lp > *b
                } else {
                    let m = model();
                    let keep = hpm_order((lp, &m), (*b, bm)) == Ordering::Less;
                    if keep {
                        self.best = Some((lp, m));
                    }
                    return;
                }
            }
        };
        if better {
            self.best = Some((lp, model()));
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.total = self.total.merge(other.total);
        self.inf_total = self.inf_total.merge(other.inf_total);
        for (a, b) in self.included.iter_mut().zip(other.included) {
            *a = a.merge(b);
        }
        for (a, b) in self.inf_included.iter_mut().zip(other.inf_included) {
            *a = a.merge(b);
        }
        self.best = match (self.best, other.best) {
            (Some(a), Some(b)) => {
                if hpm_order((a.0, &a.1), (b.0, &b.1)) == Ordering::Greater {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (a, b) => a.or(b),
        };
        self
    }
}

/// Depth-first walk over all subsets of the `free` variables, on top of the
/// variables already in `fit`.
fn walk<T: Real>(
    scorer: &Scorer<'_, T>,
    fit: &mut SubsetFit<'_, T>,
    free: &[usize],
    acc: &mut Accumulator<T>,
) -> Result<()> {
    match free.split_first() {
        None => {
            let dim = fit.dimension();
            let lp = scorer.log_posterior(fit.sse(), dim)?;
            let k = scorer.data.k();
            let members = fit.members();
            acc.add(members, lp, scorer.prior.log_prior(dim), || {
                ModelIndicator::from_indices(k, members).expect("members are valid indices")
            });
            Ok(())
        }
        Some((&j, rest)) => {
            walk(scorer, fit, rest, acc)?;
            fit.push(j)?;
            let r = walk(scorer, fit, rest, acc);
            fit.pop();
            r
        }
    }
}

/// Exact posterior summary by enumerating all `2^k` models.
///
/// The model space is split on the highest variables into independent blocks
/// that are scored in parallel and merged in a fixed order.
pub fn exact_posterior<T: Real>(
    data: &Dataset<T>,
    family: &PriorFamily<T>,
    opts: &SearchOptions<T>,
) -> Result<PosteriorSummary<T>> {
    let k = data.k();
    check_k(k, opts.enumeration_cap.min(62), "enumeration", "use the Gibbs sampling path for larger model spaces")?;
    let scorer = Scorer::new(data, family, opts)?;
    let split = SPLIT_BITS.min(k);
    let low: Vec<usize> = (0..k - split).collect();
    let blocks: Vec<Accumulator<T>> = (0..1u64 << split)
        .into_par_iter()
        .map(|block| {
            let mut fit = SubsetFit::new(data);
            for b in 0..split {
                if (block >> b) & 1 == 1 {
                    fit.push(k - split + b)?;
                }
            }
            let mut acc = Accumulator::new(k);
            walk(&scorer, &mut fit, &low, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let acc = blocks.into_iter().reduce(Accumulator::merge).expect("at least one block");
    let (total, included) = if acc.inf_total.value() > T::neg_infinity() {
        (acc.inf_total, acc.inf_included)
    } else {
        (acc.total, acc.included)
    };
    let log_z = total.value();
    let inclusion_probs: Vec<T> = included.iter().map(|l| (l.value() - log_z).exp().min(T::one())).collect();
    let (hpm_lp, hpm) = acc.best.expect("at least one model");
    Ok(PosteriorSummary {
        method: Method::Exact,
        mpm: mpm_from_inclusions(&inclusion_probs),
        inclusion_probs,
        hpm,
        hpm_log_posterior: hpm_lp,
        hpm_is_exact: true,
        log_normalizer: Some(acc.total.merge(acc.inf_total).value()),
        mc_standard_errors: None,
        skipped_models: 0,
    })
}

/// Unnormalized log posterior of every model, in binary-counting order.
pub fn model_log_posteriors<T: Real>(
    data: &Dataset<T>,
    family: &PriorFamily<T>,
    opts: &SearchOptions<T>,
) -> Result<Vec<(ModelIndicator, T)>> {
    let scorer = Scorer::new(data, family, opts)?;
    let models: Vec<ModelIndicator> = enumerate_models(data.k(), opts.enumeration_cap)?.collect();
    models
        .into_par_iter()
        .map(|m| {
            let sse = data.sse(&m)?.sse_gamma;
            let lp = scorer.log_posterior(sse, m.dimension())?;
            Ok((m, lp))
        })
        .collect()
}
