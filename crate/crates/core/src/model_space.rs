//! Model indicators over `k` candidate variables and the log-space
//! combinatorics of the model space.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::log_gamma;
use crate::numerics::log_sum_exp;
use crate::scalar::Real;

/// Default largest `k` for which full enumeration of the `2^k` models is allowed.
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// Subset of the `k` candidate variables, packed into 64-bit words.
///
/// Variable `j` (0-based) corresponds to column `j` of the candidate matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "IndicatorRepr", try_from = "IndicatorRepr")]
pub struct ModelIndicator {
    k: usize,
    words: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct IndicatorRepr {
    k: usize,
    included: Vec<usize>,
}

impl From<ModelIndicator> for IndicatorRepr {
    fn from(m: ModelIndicator) -> Self {
        IndicatorRepr { k: m.k, included: m.indices().collect() }
    }
}

impl TryFrom<IndicatorRepr> for ModelIndicator {
    type Error = Error;
    fn try_from(r: IndicatorRepr) -> Result<Self> {
        ModelIndicator::from_indices(r.k, &r.included)
    }
}

impl ModelIndicator {
    /// The null model `M_0` over `k` variables.
    pub fn null(k: usize) -> Self {
        ModelIndicator { k, words: vec![0; k.div_ceil(64)] }
    }

    /// The full model with all `k` variables.
    pub fn full(k: usize) -> Self {
        let mut m = Self::null(k);
        for j in 0..k {
            m.set(j, true);
        }
        m
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut m = Self::null(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            m.set(j, b);
        }
        m
    }

    pub fn from_indices(k: usize, included: &[usize]) -> Result<Self> {
        let mut m = Self::null(k);
        for &j in included {
            if j >= k {
                return Err(Error::InvalidArgument(format!("variable index {j} >= k = {k}")));
            }
            m.set(j, true);
        }
        Ok(m)
    }

    /// Model whose bit `j` is bit `j` of `mask` (requires `k <= 64`).
    pub fn from_mask(k: usize, mask: u64) -> Self {
        assert!(k <= 64, "from_mask supports k <= 64");
        let mut m = Self::null(k);
        if k > 0 {
            let keep = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
            m.words[0] = mask & keep;
        }
        m
    }

    /// Low 64 bits of the packed representation.
    pub fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `|γ|`, the number of included variables.
    pub fn dimension(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, j: usize) -> bool {
        debug_assert!(j < self.k);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, on: bool) {
        assert!(j < self.k, "variable index {j} out of range for k = {}", self.k);
        let bit = 1u64 << (j % 64);
        if on {
            self.words[j / 64] |= bit;
        } else {
            self.words[j / 64] &= !bit;
        }
    }

    pub fn toggled(&self, j: usize) -> Self {
        let mut m = self.clone();
        m.set(j, !self.contains(j));
        m
    }

    pub fn with(&self, j: usize, on: bool) -> Self {
        let mut m = self.clone();
        m.set(j, on);
        m
    }

    /// Included variable indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&j| self.contains(j))
    }

    pub fn is_subset_of(&self, other: &ModelIndicator) -> bool {
        self.k == other.k && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Lexicographic order of `(γ_1, ..., γ_k)` with `0 < 1`.
    pub fn lexicographic_cmp(&self, other: &ModelIndicator) -> Ordering {
        for j in 0..self.k.min(other.k) {
            match (self.contains(j), other.contains(j)) {
                (false, true) => return Ordering::Less,
                (true, false) => return Ordering::Greater,
                _ => {}
            }
        }
        self.k.cmp(&other.k)
    }

    /// Parsimony-first order: smaller dimension, then lexicographically smaller.
    pub fn parsimony_cmp(&self, other: &ModelIndicator) -> Ordering {
        self.dimension()
            .cmp(&other.dimension())
            .then_with(|| self.lexicographic_cmp(other))
    }
}

impl fmt::Display for ModelIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.k {
            f.write_str(if self.contains(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ModelIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelIndicator({self})")
    }
}

/// Stream of all `2^k` models in binary-counting order on the mask.
#[derive(Debug, Clone)]
pub struct ModelStream {
    k: usize,
    next: u64,
    end: u64,
}

impl Iterator for ModelStream {
    type Item = ModelIndicator;

    fn next(&mut self) -> Option<ModelIndicator> {
        if self.next >= self.end {
            return None;
        }
        let m = ModelIndicator::from_mask(self.k, self.next);
        self.next += 1;
        Some(m)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.end - self.next) as usize;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for ModelStream {}

impl ModelStream {
    /// Resumes the stream at the given binary-counting position.
    pub fn starting_at(mut self, position: u64) -> Self {
        self.next = position.min(self.end);
        self
    }
}

/// Enumerates every model over `k` variables, refusing `k > cap`.
pub fn enumerate_models(k: usize, cap: usize) -> Result<ModelStream> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k > cap || k > 62 {
        return Err(Error::Capacity {
            what: "enumeration",
            k,
            cap: cap.min(62),
            hint: "use the Gibbs sampling path for larger model spaces",
        });
    }
    Ok(ModelStream { k, next: 0, end: 1u64 << k })
}

/// `ln C(k, d)`.
pub fn log_choose<T: Real>(k: usize, d: usize) -> Result<T> {
    if d > k {
        return Err(Error::domain("log_choose", format!("d = {d} > k = {k}")));
    }
    if d == 0 || d == k {
        return Ok(T::zero());
    }
    let one = T::one();
    Ok(log_gamma(T::of(k) + one)? - log_gamma(T::of(d) + one)? - log_gamma(T::of(k - d) + one)?)
}

/// `ln N_k`, the log of the number of "large" models: those of dimension
/// above `k/2` (even `k`) or at least `(k+1)/2` (odd `k`).
pub fn big_model_count<T: Real>(k: usize) -> Result<T> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let first = if k % 2 == 0 { k / 2 + 1 } else { k.div_ceil(2) };
    let terms: Vec<T> = (first..=k).map(|i| log_choose(k, i)).collect::<Result<_>>()?;
    Ok(log_sum_exp(&terms))
}
