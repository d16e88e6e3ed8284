use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_k, Scorer, SearchOptions};
use crate::error::{Error, Result};
use crate::glm::{Dataset, ReducedDesign, SubsetFit};
use crate::model_space::ModelIndicator;
use crate::priors::PriorFamily;
use crate::scalar::Real;

/// The lowest-SSE model of every dimension `d = 0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionProfile<T> {
    pub k: usize,
    pub models: Vec<ModelIndicator>,
    pub sse: Vec<T>,
    /// `proven[d]` is false when a deadline stopped the search before
    /// `models[d]` was shown to be optimal.
    pub proven: Vec<bool>,
    pub timed_out: bool,
    /// Tree nodes expanded.
    pub nodes: u64,
}

impl<T: Real> DimensionProfile<T> {
    pub fn is_complete(&self) -> bool {
        self.proven.iter().all(|&p| p)
    }

    /// `ln B_{γ*(d)} + ln Pr(M_{γ*(d)}) - ln Pr(M_0)` for every `d`; zero at `d = 0`.
    pub fn log_posterior_ratios(
        &self,
        family: &PriorFamily<T>,
        data: &Dataset<T>,
        opts: &SearchOptions<T>,
    ) -> Result<Vec<T>> {
        let scorer = Scorer::new(data, family, opts)?;
        let base = scorer.prior.log_prior(0);
        (0..=self.k)
            .map(|d| Ok(scorer.log_posterior(self.sse[d], d)? - base))
            .collect()
    }
}

/// Upper-triangular factor of an ordered column set, with the rotated response.
#[derive(Debug, Clone)]
struct Triangle<T> {
    vars: Vec<usize>,
    /// Row-major; `r[i][j - i]` holds entry `(i, j)` for `j >= i`.
    r: Vec<Vec<T>>,
    c: Vec<T>,
    /// SSE of the model with all of `vars`.
    tail: T,
}

impl<T: Real> Triangle<T> {
    fn build(design: &ReducedDesign<T>, vars: Vec<usize>) -> Result<Self> {
        let m = design.dim;
        let p = vars.len();
        let mut a: Vec<Vec<T>> = vars.iter().map(|&v| design.columns[v].clone()).collect();
        a.push(design.response.clone());
        for j in 0..p {
            let alpha = a[j][j..].iter().map(|&t| t * t).sum::<T>().sqrt();
            if alpha <= design.rank_tol {
                return Err(Error::RankDeficient { columns: vec![format!("candidate {}", vars[j] + 1)] });
            }
            let beta = if a[j][j] > T::zero() { -alpha } else { alpha };
            let mut v: Vec<T> = a[j][j..].to_vec();
            v[0] = v[0] - beta;
            let vnorm2: T = v.iter().map(|&t| t * t).sum();
            for col in a.iter_mut().skip(j) {
                let dot: T = v.iter().zip(&col[j..]).map(|(&vi, &ci)| vi * ci).sum();
                let s = (dot + dot) / vnorm2;
                for (ci, &vi) in col[j..].iter_mut().zip(&v) {
                    *ci = *ci - s * vi;
                }
            }
        }
        let y = a.pop().expect("response column");
        let r = (0..p).map(|i| (i..p).map(|j| a[j][i]).collect()).collect();
        let c = y[..p].to_vec();
        let tail = y[p..m].iter().map(|&t| t * t).sum();
        Ok(Triangle { vars, r, c, tail })
    }

    fn len(&self) -> usize {
        self.vars.len()
    }

    /// SSE of the first `j` variables for `j = 0..=len`.
    fn prefix_sse(&self) -> Vec<T> {
        let p = self.len();
        let mut out = vec![self.tail; p + 1];
        for j in (0..p).rev() {
            out[j] = out[j + 1] + self.c[j] * self.c[j];
        }
        out
    }

    /// Removes the variable at `pos` and restores triangular form with Givens rotations.
    fn delete(&mut self, pos: usize) {
        let p = self.len();
        self.vars.remove(pos);
        // Rows below `pos` now start one column to the left, at their subdiagonal entry.
        for (i, row) in self.r.iter_mut().enumerate().take(pos + 1) {
            row.remove(pos - i);
        }
        for i in pos..p - 1 {
            // Rows i and i+1 both cover columns i..; rotate to zero entry (i+1, i).
            let a = self.r[i][0];
            let b = self.r[i + 1][0];
            let rho = a.hypot(b);
            let (cs, sn) = if rho == T::zero() { (T::one(), T::zero()) } else { (a / rho, b / rho) };
            let (upper, lower) = self.r.split_at_mut(i + 1);
            for (x, y) in upper[i].iter_mut().zip(lower[0].iter_mut()) {
                let (u, w) = (*x, *y);
                *x = cs * u + sn * w;
                *y = cs * w - sn * u;
            }
            let (u, w) = (self.c[i], self.c[i + 1]);
            self.c[i] = cs * u + sn * w;
            self.c[i + 1] = cs * w - sn * u;
            // Row i+1 now starts with a zero at column i; drop it.
            self.r[i + 1].remove(0);
        }
        self.r.pop();
        let last = self.c.pop().expect("nonempty");
        self.tail = self.tail + last * last;
    }

    /// Reorders the variables at positions `from..len` as `order` (positions
    /// relative to `from`) and re-triangularizes the trailing block.
    fn reorder_tail(&mut self, from: usize, order: &[usize]) {
        let p = self.len();
        let f = p - from;
        let old_vars = self.vars[from..].to_vec();
        for (t, &o) in order.iter().enumerate() {
            self.vars[from + t] = old_vars[o];
        }
        for i in 0..from {
            let old: Vec<T> = self.r[i][from - i..].to_vec();
            for (t, &o) in order.iter().enumerate() {
                self.r[i][from - i + t] = old[o];
            }
        }
        // Dense trailing block, column-major, plus the response segment.
        let mut b: Vec<Vec<T>> = order
            .iter()
            .map(|&o| (0..f).map(|i| if i <= o { self.r[from + i][o - i] } else { T::zero() }).collect())
            .collect();
        let mut y: Vec<T> = self.c[from..].to_vec();
        for j in 0..f {
            let alpha = b[j][j..].iter().map(|&t| t * t).sum::<T>().sqrt();
            if alpha == T::zero() {
                continue;
            }
            let beta = if b[j][j] > T::zero() { -alpha } else { alpha };
            let mut v: Vec<T> = b[j][j..].to_vec();
            v[0] = v[0] - beta;
            let vnorm2: T = v.iter().map(|&t| t * t).sum();
            if vnorm2 == T::zero() {
                continue;
            }
            for col in b.iter_mut().skip(j).map(|c| &mut c[j..]).chain(std::iter::once(&mut y[j..])) {
                let dot: T = v.iter().zip(col.iter()).map(|(&vi, &ci)| vi * ci).sum();
                let s = (dot + dot) / vnorm2;
                for (ci, &vi) in col.iter_mut().zip(&v) {
                    *ci = *ci - s * vi;
                }
            }
        }
        for i in 0..f {
            self.r[from + i] = (i..f).map(|j| b[j][i]).collect();
        }
        self.c[from..].copy_from_slice(&y);
    }

    /// SSE increase from dropping each variable at positions `from..len`.
    fn drop_increments(&self, from: usize) -> Vec<T> {
        let p = self.len();
        let at = |i: usize, j: usize| self.r[i][j - i];
        let mut beta = self.c.clone();
        for i in (0..p).rev() {
            let mut v = beta[i];
            for j in i + 1..p {
                v = v - at(i, j) * beta[j];
            }
            beta[i] = v / at(i, i);
        }
        let mut x = vec![T::zero(); p];
        (from..p)
            .map(|t| {
                let mut norm2 = T::zero();
                for j in t..p {
                    let mut v = if j == t { T::one() } else { T::zero() };
                    for i in t..j {
                        v = v - x[i] * at(i, j);
                    }
                    x[j] = v / at(j, j);
                    norm2 = norm2 + x[j] * x[j];
                }
                beta[t] * beta[t] / norm2
            })
            .collect()
    }
}

struct Search<T> {
    k: usize,
    best: Vec<T>,
    models: Vec<Vec<usize>>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl<T: Real> Search<T> {
    fn record(&mut self, tri: &Triangle<T>, from: usize) {
        let sse = tri.prefix_sse();
        for (d, &s) in sse.iter().enumerate().skip(from) {
            if s < self.best[d] {
                self.best[d] = s;
                self.models[d] = tri.vars[..d].to_vec();
            }
        }
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if let Some(limit) = self.deadline {
            if self.nodes % 1024 == 1 && Instant::now() >= limit {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    /// Expands the node whose fixed set is `tri.vars[..s]` and whose free
    /// variables are `tri.vars[s..]`. The prefixes of `tri` are already recorded.
    fn visit(&mut self, tri: &Triangle<T>, s: usize) {
        self.nodes += 1;
        if self.out_of_time() {
            return;
        }
        let free = tri.len() - s;
        if free < 2 {
            return;
        }
        let mut cur = tri.clone();
        let drops = cur.drop_increments(s);
        let mut order: Vec<usize> = (0..free).collect();
        order.sort_by(|&a, &b| drops[b].partial_cmp(&drops[a]).unwrap_or(std::cmp::Ordering::Equal));
        cur.reorder_tail(s, &order);
        self.record(&cur, s + 1);
        for i in 0..free {
            if i > 0 {
                cur.delete(s);
                self.record(&cur, s + 1);
            }
            // Child: fixed vars[..s+1], free vars[s+1..].
            let (lo, hi) = (s + 1, cur.len());
            if hi == lo {
                break;
            }
            if (lo..=hi).all(|d| cur.tail >= self.best[d]) {
                break;
            }
            if (lo + 1..=hi).all(|d| cur.tail >= self.best[d]) {
                continue;
            }
            if hi > lo + 1 {
                let mut drops = cur.drop_increments(lo);
                drops.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                let pruned = (lo + 1..=hi).all(|d| {
                    let omitted = hi - d;
                    let extra = if omitted == 0 { T::zero() } else { drops[omitted - 1] };
                    cur.tail + extra >= self.best[d]
                });
                if pruned {
                    continue;
                }
            }
            self.visit(&cur, s + 1);
            if self.timed_out {
                return;
            }
        }
    }
}

/// Lowest-SSE model of every dimension by branch and bound over the subset tree.
///
/// Variables are ordered by decreasing single-variable SSE reduction. A node
/// is pruned when, for every dimension it could still reach, the SSE of the
/// largest model below it (plus the smallest possible cost of the variables
/// that must be left out) is no better than the incumbent.
pub fn best_subset_per_dimension<T: Real>(data: &Dataset<T>, opts: &SearchOptions<T>) -> Result<DimensionProfile<T>> {
    let k = data.k();
    check_k(k, opts.bnb_cap, "branch-and-bound", "use the Gibbs sampling path for larger model spaces")?;
    let null = SubsetFit::new(data);
    let mut single: Vec<(T, usize)> = (0..k).map(|j| Ok((null.sse_with(j)?, j))).collect::<Result<_>>()?;
    single.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = single.iter().map(|p| p.1).collect();
    let design = data.reduced();
    let root = Triangle::build(design, order)?;
    let mut search = Search {
        k,
        best: vec![T::infinity(); k + 1],
        models: vec![Vec::new(); k + 1],
        nodes: 0,
        deadline: opts.bnb_deadline.map(|d| Instant::now() + d),
        timed_out: false,
    };
    search.record(&root, 0);
    search.visit(&root, 0);
    let timed_out = search.timed_out;
    let models = search
        .models
        .iter()
        .map(|v| ModelIndicator::from_indices(search.k, v))
        .collect::<Result<Vec<_>>>()?;
    let proven = (0..=k).map(|d| !timed_out || d == 0 || d == k).collect();
    Ok(DimensionProfile { k, models, sse: search.best, proven, timed_out, nodes: search.nodes })
}

/// `argmax_d [ln B_{γ*(d)} + ln Pr(M_{γ*(d)})]` over `d = 0..=k`, with the
/// null model at `d = 0`; ties go to the smaller dimension.
///
/// Returns the model and its unnormalized log posterior.
pub fn hpm_via_profile<T: Real>(
    profile: &DimensionProfile<T>,
    family: &PriorFamily<T>,
    data: &Dataset<T>,
    opts: &SearchOptions<T>,
) -> Result<(ModelIndicator, T)> {
    if profile.k != data.k() {
        return Err(Error::InvalidArgument("profile and dataset disagree on k".into()));
    }
    let scorer = Scorer::new(data, family, opts)?;
    let mut best: Option<(usize, T)> = None;
    for d in 0..=profile.k {
        let lp = scorer.log_posterior(profile.sse[d], d)?;
        if best.is_none_or(|(_, b)| lp > b) {
            best = Some((d, lp));
        }
    }
    let (d, lp) = best.expect("k + 1 >= 1 dimensions");
    Ok((profile.models[d].clone(), lp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exhaustive(data: &Dataset<f64>) -> Vec<f64> {
        let k = data.k();
        let mut best = vec![f64::INFINITY; k + 1];
        for mask in 0..1u64 << k {
            let m = ModelIndicator::from_mask(k, mask);
            let s = data.sse(&m).unwrap().sse_gamma;
            let d = m.dimension();
            best[d] = best[d].min(s);
        }
        best
    }

    fn random(n: usize, k: usize, seed: u64, corr: f64) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let x: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|i| corr * base[i] + rng.random::<f64>() - 0.5).collect())
            .collect();
        let y = (0..n).map(|i| x[0][i] + 0.5 * x[k / 2][i] - x[k - 1][i] + rng.random::<f64>()).collect();
        Dataset::with_intercept(y, x).unwrap()
    }

    #[test]
    fn triangle_delete_matches_rebuild() {
        let d = random(30, 7, 1, 0.3);
        let mut t = Triangle::build(d.reduced(), vec![3, 1, 4, 0, 6, 2, 5]).unwrap();
        t.delete(2);
        let fresh = Triangle::build(d.reduced(), vec![3, 1, 0, 6, 2, 5]).unwrap();
        let (a, b) = (t.prefix_sse(), fresh.prefix_sse());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10 * y.max(1.0), "{a:?} vs {b:?}");
        }
        t.delete(0);
        let fresh = Triangle::build(d.reduced(), vec![1, 0, 6, 2, 5]).unwrap();
        for (x, y) in t.prefix_sse().iter().zip(&fresh.prefix_sse()) {
            assert!((x - y).abs() < 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn reorder_tail_matches_rebuild() {
        let d = random(30, 7, 8, 0.4);
        let mut t = Triangle::build(d.reduced(), vec![3, 1, 4, 0, 6, 2, 5]).unwrap();
        t.reorder_tail(2, &[3, 0, 4, 2, 1]);
        assert_eq!(t.vars, vec![3, 1, 2, 4, 5, 6, 0]);
        let fresh = Triangle::build(d.reduced(), t.vars.clone()).unwrap();
        for (x, y) in t.prefix_sse().iter().zip(&fresh.prefix_sse()) {
            assert!((x - y).abs() < 1e-10 * y.max(1.0));
        }
        t.delete(3);
        let fresh = Triangle::build(d.reduced(), t.vars.clone()).unwrap();
        for (x, y) in t.prefix_sse().iter().zip(&fresh.prefix_sse()) {
            assert!((x - y).abs() < 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn drop_increments_match_refits() {
        let d = random(30, 6, 2, 0.5);
        let vars = vec![2, 0, 5, 1, 4, 3];
        let t = Triangle::build(d.reduced(), vars.clone()).unwrap();
        let full = t.tail;
        for (off, inc) in t.drop_increments(1).into_iter().enumerate() {
            let pos = off + 1;
            let rest: Vec<usize> = vars.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, &v)| v).collect();
            let m = ModelIndicator::from_indices(6, &rest).unwrap();
            let refit = d.sse(&m).unwrap().sse_gamma;
            assert!((full + inc - refit).abs() < 1e-10 * refit, "pos {pos}");
        }
    }

    #[test]
    fn matches_exhaustive_search() {
        for (seed, corr) in [(3u64, 0.0), (4, 0.5), (5, 2.0)] {
            let d = random(30, 12, seed, corr);
            let p = best_subset_per_dimension(&d, &SearchOptions::default()).unwrap();
            let want = exhaustive(&d);
            for dim in 0..=12 {
                assert!((p.sse[dim] - want[dim]).abs() <= 1e-9 * want[dim], "seed {seed} d={dim}");
                assert_eq!(p.models[dim].dimension(), dim);
                let check = d.sse(&p.models[dim]).unwrap().sse_gamma;
                assert!((check - p.sse[dim]).abs() <= 1e-9 * check);
            }
            assert!(p.is_complete());
        }
    }

    #[test]
    fn full_dimension_is_the_full_model() {
        let d = random(25, 6, 7, 0.2);
        let p = best_subset_per_dimension(&d, &SearchOptions::default()).unwrap();
        assert_eq!(p.models[6], ModelIndicator::full(6));
        assert_eq!(p.models[0], ModelIndicator::null(6));
    }
}
