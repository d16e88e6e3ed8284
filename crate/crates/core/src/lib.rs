//! Objective model priors for Bayesian variable selection in the normal
//! linear model.
//!
//! The crate provides
//!
//! * prior families over the model space ([`PriorFamily`]), with per-model
//!   log priors, dimension masses and prior inclusion probabilities;
//! * Bayes factors under the intrinsic parameter prior ([`BayesFactorEngine`]);
//! * least-squares plumbing for datasets and subset fits ([`Dataset`]);
//! * posterior summaries by exact enumeration, branch and bound and Gibbs
//!   sampling ([`search`]).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The `*64`
//! and `*32` aliases below name the common instantiations.
//!
//! ```
//! use modelprior::{exact_posterior, PriorFamily, SearchOptions, SyntheticSpec};
//!
//! let data = SyntheticSpec::new(60, 5, vec![0, 3], 7).with_coefficient(2.0).generate::<f64>()?;
//! let post = exact_posterior(&data, &PriorFamily::cmg(), &SearchOptions::default())?;
//! assert!(post.hpm.contains(0) && post.hpm.contains(3));
//! # Ok::<(), modelprior::Error>(())
//! ```

pub mod bayes_factor;
pub mod error;
pub mod glm;
pub mod model_space;
pub mod numerics;
pub mod priors;
pub mod scalar;
pub mod search;
pub mod synth;

pub use bayes_factor::{log_bayes_factor, BayesFactorEngine, BayesFactorInput};
pub use error::{Error, Result};
pub use glm::{load_csv, ColumnRef, Dataset, FitStatistics, LoadOptions, SubsetFit};
pub use model_space::{enumerate_models, ModelIndicator};
pub use priors::{DimensionMass, ExponentialRate, PreparedPrior, PriorFamily, PriorKind};
pub use scalar::Real;
pub use search::{
    best_subset_per_dimension, exact_posterior, gibbs_posterior, hpm_via_profile, posterior_auto, DimensionProfile,
    GibbsOptions, Method, PosteriorSummary, SearchOptions,
};
pub use synth::SyntheticSpec;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type PriorFamily64 = PriorFamily<f64>;
pub type PriorFamily32 = PriorFamily<f32>;
pub type PosteriorSummary64 = PosteriorSummary<f64>;
pub type PosteriorSummary32 = PosteriorSummary<f32>;
pub type SearchOptions64 = SearchOptions<f64>;
pub type SearchOptions32 = SearchOptions<f32>;
pub type BayesFactorEngine64 = BayesFactorEngine<f64>;
pub type BayesFactorEngine32 = BayesFactorEngine<f32>;
pub type DimensionProfile64 = DimensionProfile<f64>;
