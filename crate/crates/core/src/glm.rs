//! Regression data and residual sums of squares for submodels of the
//! general linear model `y = X0 β0 + X_γ β_γ + σ ε`.
//!
//! On construction the design `[X0 X y]` is reduced by a Householder QR
//! decomposition. Projecting out `X0` then amounts to dropping the first
//! `k0` coordinates, so every candidate column and the response are stored
//! as vectors of length `k + 1` and every later fit is independent of `n`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_space::ModelIndicator;
use crate::scalar::Real;

/// Least-squares summary of one model, as consumed by the Bayes factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStatistics<T> {
    pub sse_gamma: T,
    pub sse_null: T,
    pub n: usize,
    pub k0: usize,
    pub dim: usize,
}

impl<T: Real> FitStatistics<T> {
    /// `SSE_γ / SSE_0`.
    pub fn ratio(&self) -> T {
        self.sse_gamma / self.sse_null
    }

    /// True when the residual is zero to working precision.
    pub fn is_degenerate(&self) -> bool {
        self.ratio() <= degenerate_ratio::<T>()
    }
}

/// SSE ratios at or below this are treated as an exact fit.
pub fn degenerate_ratio<T: Real>() -> T {
    let e = T::lit(100.0) * T::epsilon();
    e * e
}

/// Reference to a CSV column, by header name or 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl From<&str> for ColumnRef {
    fn from(s: &str) -> Self {
        ColumnRef::Name(s.to_string())
    }
}

impl From<usize> for ColumnRef {
    fn from(i: usize) -> Self {
        ColumnRef::Index(i)
    }
}

/// How [`load_csv`] maps columns onto `y`, `X0` and `X`.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub response: ColumnRef,
    /// Columns kept in every model. An intercept is prepended unless one of
    /// these is constant.
    pub fixed: Vec<ColumnRef>,
    /// Candidate columns; `None` takes every column not used elsewhere.
    pub candidates: Option<Vec<ColumnRef>>,
    /// Subtract the mean from each candidate column.
    pub center: bool,
}

impl LoadOptions {
    pub fn new(response: impl Into<ColumnRef>) -> Self {
        LoadOptions { response: response.into(), fixed: Vec::new(), candidates: None, center: false }
    }
}

/// `[X0 X y]` after projecting out `X0`, in the coordinates of a QR basis.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ReducedDesign<T> {
    /// Length of every reduced vector, `k + 1`.
    pub(crate) dim: usize,
    pub(crate) columns: Vec<Vec<T>>,
    pub(crate) response: Vec<T>,
    pub(crate) sse_null: T,
    pub(crate) rank_tol: T,
}

/// Response, fixed covariates and candidate covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    y: Vec<T>,
    x0: Vec<Vec<T>>,
    x: Vec<Vec<T>>,
    response_name: String,
    fixed_names: Vec<String>,
    candidate_names: Vec<String>,
    reduced: ReducedDesign<T>,
}

impl<T: Real> Dataset<T> {
    /// Builds a dataset from column vectors. `x0` and `x` are lists of columns.
    ///
    /// Fails if the lengths disagree, a value is not finite, `n <= k0 + k`,
    /// `(X0 X)` is rank deficient, or `y` lies in the span of `X0`.
    pub fn new(y: Vec<T>, x0: Vec<Vec<T>>, x: Vec<Vec<T>>) -> Result<Self> {
        let fixed_names = (0..x0.len()).map(|i| format!("x0_{}", i + 1)).collect();
        let candidate_names = (0..x.len()).map(|j| format!("x{}", j + 1)).collect();
        Self::with_names(y, x0, x, "y".into(), fixed_names, candidate_names)
    }

    /// As [`Dataset::new`] with an intercept as the only fixed covariate.
    pub fn with_intercept(y: Vec<T>, x: Vec<Vec<T>>) -> Result<Self> {
        let n = y.len();
        let mut d = Self::new(y, vec![vec![T::one(); n]], x)?;
        d.fixed_names = vec!["(intercept)".into()];
        Ok(d)
    }

    pub fn with_names(
        y: Vec<T>,
        x0: Vec<Vec<T>>,
        x: Vec<Vec<T>>,
        response_name: String,
        fixed_names: Vec<String>,
        candidate_names: Vec<String>,
    ) -> Result<Self> {
        let n = y.len();
        let (k0, k) = (x0.len(), x.len());
        if fixed_names.len() != k0 || candidate_names.len() != k {
            return Err(Error::InvalidArgument("one name per column required".into()));
        }
        if k == 0 {
            return Err(Error::Data("no candidate covariates".into()));
        }
        if n <= k0 + k {
            return Err(Error::Data(format!(
                "need n > k0 + k, got n = {n}, k0 = {k0}, k = {k}"
            )));
        }
        let named = fixed_names.iter().zip(&x0).chain(candidate_names.iter().zip(&x));
        for (name, col) in named.chain(std::iter::once((&response_name, &y))) {
            if col.len() != n {
                return Err(Error::Data(format!("column {name} has {} rows, expected {n}", col.len())));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("column {name}, row {}: value is not finite", i + 1)));
            }
        }
        let mut all_names: Vec<String> = fixed_names.clone();
        all_names.extend(candidate_names.iter().cloned());
        let reduced = reduce(&y, &x0, &x, &all_names)?;
        Ok(Dataset { y, x0, x, response_name, fixed_names, candidate_names, reduced })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
    pub fn k0(&self) -> usize {
        self.x0.len()
    }
    pub fn k(&self) -> usize {
        self.x.len()
    }
    pub fn y(&self) -> &[T] {
        &self.y
    }
    pub fn fixed_columns(&self) -> &[Vec<T>] {
        &self.x0
    }
    pub fn candidate_columns(&self) -> &[Vec<T>] {
        &self.x
    }
    pub fn response_name(&self) -> &str {
        &self.response_name
    }
    pub fn fixed_names(&self) -> &[String] {
        &self.fixed_names
    }
    pub fn candidate_names(&self) -> &[String] {
        &self.candidate_names
    }

    /// `SSE_0`, the residual sum of squares of the model with `X0` only.
    pub fn sse_null(&self) -> T {
        self.reduced.sse_null
    }

    pub(crate) fn reduced(&self) -> &ReducedDesign<T> {
        &self.reduced
    }

    /// Same data with the candidate columns reordered: new column `i` is old column `order[i]`.
    pub fn permute_candidates(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.k()];
        if order.len() != self.k() || order.iter().any(|&j| j >= self.k() || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::InvalidArgument("order must be a permutation of 0..k".into()));
        }
        let x = order.iter().map(|&j| self.x[j].clone()).collect();
        let names = order.iter().map(|&j| self.candidate_names[j].clone()).collect();
        Self::with_names(self.y.clone(), self.x0.clone(), x, self.response_name.clone(), self.fixed_names.clone(), names)
    }

    /// Same design with `y` multiplied by `s`.
    pub fn scale_response(&self, s: T) -> Result<Self> {
        let y = self.y.iter().map(|&v| v * s).collect();
        Self::with_names(y, self.x0.clone(), self.x.clone(), self.response_name.clone(), self.fixed_names.clone(), self.candidate_names.clone())
    }

    fn check_model(&self, m: &ModelIndicator) -> Result<()> {
        if m.k() != self.k() {
            return Err(Error::InvalidArgument(format!(
                "model has k = {} but the dataset has {} candidates",
                m.k(),
                self.k()
            )));
        }
        Ok(())
    }

    /// Least-squares fit statistics of `M_γ`.
    pub fn sse(&self, m: &ModelIndicator) -> Result<FitStatistics<T>> {
        self.check_model(m)?;
        let fit = SubsetFit::from_model(self, m)?;
        Ok(self.stats(fit.sse(), m.dimension()))
    }

    /// SSE of `m` with variable `j` toggled.
    pub fn delta_sse(&self, m: &ModelIndicator, j: usize) -> Result<T> {
        self.check_model(m)?;
        if j >= self.k() {
            return Err(Error::InvalidArgument(format!("variable {j} out of range 0..{}", self.k())));
        }
        let fit = SubsetFit::from_model(self, m)?;
        if m.contains(j) {
            fit.sse_without(j)
        } else {
            fit.sse_with(j)
        }
    }

    pub(crate) fn stats(&self, sse_gamma: T, dim: usize) -> FitStatistics<T> {
        FitStatistics { sse_gamma, sse_null: self.sse_null(), n: self.n(), k0: self.k0(), dim }
    }
}

/// Householder QR of `[X0 X y]`, keeping rows `k0..k0+k+1` of the triangular factor.
fn reduce<T: Real>(y: &[T], x0: &[Vec<T>], x: &[Vec<T>], names: &[String]) -> Result<ReducedDesign<T>> {
    let n = y.len();
    let (k0, k) = (x0.len(), x.len());
    let p = k0 + k + 1;
    let mut a: Vec<Vec<T>> = x0.iter().chain(x.iter()).cloned().collect();
    a.push(y.to_vec());
    let norm = |v: &[T]| v.iter().map(|&t| t * t).sum::<T>().sqrt();
    let max_norm = a[..p - 1].iter().map(|c| norm(c)).fold(T::zero(), T::max);
    let rank_tol = T::of(n) * T::epsilon() * max_norm;
    let mut deficient = Vec::new();
    for j in 0..p {
        // Householder reflector zeroing a[j][j+1..].
        let alpha = norm(&a[j][j..]);
        if j < p - 1 && alpha <= rank_tol {
            deficient.push(names[j].clone());
            continue;
        }
        if alpha == T::zero() {
            continue;
        }
        let beta = if a[j][j] > T::zero() { -alpha } else { alpha };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - beta;
        let vnorm2: T = v.iter().map(|&t| t * t).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            let dot: T = v.iter().zip(&col[j..]).map(|(&vi, &ci)| vi * ci).sum();
            let s = (dot + dot) / vnorm2;
            for (ci, &vi) in col[j..].iter_mut().zip(&v) {
                *ci = *ci - s * vi;
            }
        }
    }
    if !deficient.is_empty() {
        return Err(Error::RankDeficient { columns: deficient });
    }
    let take = |c: &Vec<T>| c[k0..k0 + k + 1].to_vec();
    let columns: Vec<Vec<T>> = a[k0..k0 + k].iter().map(take).collect();
    let response = take(&a[p - 1]);
    let sse_null: T = response.iter().map(|&t| t * t).sum();
    let y_scale: T = y.iter().map(|&t| t * t).sum();
    if !(sse_null > T::epsilon() * T::epsilon() * y_scale) {
        return Err(Error::Data("response lies in the span of the fixed covariates".into()));
    }
    Ok(ReducedDesign { dim: k + 1, columns, response, sse_null, rank_tol })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// Incrementally updated least-squares fit on a subset of candidates.
///
/// Keeps an orthonormal basis of the selected reduced columns (classical
/// Gram-Schmidt with reorthogonalization), the triangular factor, and the
/// residual of the reduced response.
#[derive(Debug, Clone)]
pub struct SubsetFit<'a, T> {
    design: &'a ReducedDesign<T>,
    members: Vec<usize>,
    basis: Vec<Vec<T>>,
    /// `r[c][i]`: entry `(i, c)` of the triangular factor, `i <= c`.
    r: Vec<Vec<T>>,
    coef: Vec<T>,
    residual: Vec<T>,
    sse: T,
}

impl<'a, T: Real> SubsetFit<'a, T> {
    /// The fit of the null model.
    pub fn new(data: &'a Dataset<T>) -> Self {
        let design = data.reduced();
        SubsetFit {
            design,
            members: Vec::new(),
            basis: Vec::new(),
            r: Vec::new(),
            coef: Vec::new(),
            residual: design.response.clone(),
            sse: design.sse_null,
        }
    }

    pub fn from_model(data: &'a Dataset<T>, m: &ModelIndicator) -> Result<Self> {
        let mut fit = Self::new(data);
        for j in m.indices() {
            fit.push(j)?;
        }
        Ok(fit)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn dimension(&self) -> usize {
        self.members.len()
    }

    pub fn sse(&self) -> T {
        self.sse
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.contains(&j)
    }

    /// Component of candidate `j` orthogonal to the current basis, with its coefficients.
    fn orthogonalize(&self, j: usize) -> Result<(Vec<T>, Vec<T>, T)> {
        let z = &self.design.columns[j];
        let mut w = z.clone();
        let mut h = vec![T::zero(); self.basis.len()];
        for _ in 0..2 {
            for (hi, q) in h.iter_mut().zip(&self.basis) {
                let c = dot(q, &w);
                *hi = *hi + c;
                axpy(-c, q, &mut w);
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm <= self.design.rank_tol {
            return Err(Error::RankDeficient { columns: vec![format!("candidate {}", j + 1)] });
        }
        Ok((w, h, norm))
    }

    /// Adds candidate `j` to the fit.
    pub fn push(&mut self, j: usize) -> Result<()> {
        if self.contains(j) {
            return Err(Error::InvalidArgument(format!("candidate {j} already in the fit")));
        }
        let (mut w, mut h, norm) = self.orthogonalize(j)?;
        let inv = norm.recip();
        w.iter_mut().for_each(|t| *t = *t * inv);
        let c = dot(&w, &self.residual);
        axpy(-c, &w, &mut self.residual);
        h.push(norm);
        self.members.push(j);
        self.basis.push(w);
        self.r.push(h);
        self.coef.push(c);
        self.sse = dot(&self.residual, &self.residual);
        Ok(())
    }

    /// Removes the most recently added candidate.
    pub fn pop(&mut self) -> Option<usize> {
        let j = self.members.pop()?;
        let q = self.basis.pop().expect("basis tracks members");
        let c = self.coef.pop().expect("coefficients track members");
        self.r.pop();
        axpy(c, &q, &mut self.residual);
        self.sse = dot(&self.residual, &self.residual);
        Some(j)
    }

    /// Removes candidate `j`, refactoring the remaining columns.
    pub fn remove(&mut self, j: usize) -> Result<()> {
        let pos = self.position(j)?;
        let tail: Vec<usize> = self.members[pos + 1..].to_vec();
        while self.members.len() > pos {
            self.pop();
        }
        for t in tail {
            self.push(t)?;
        }
        Ok(())
    }

    fn position(&self, j: usize) -> Result<usize> {
        self.members
            .iter()
            .position(|&m| m == j)
            .ok_or_else(|| Error::InvalidArgument(format!("candidate {j} not in the fit")))
    }

    /// SSE after adding candidate `j`, without changing the fit.
    pub fn sse_with(&self, j: usize) -> Result<T> {
        if self.contains(j) {
            return Ok(self.sse);
        }
        let (w, _, norm) = self.orthogonalize(j)?;
        let c = dot(&w, &self.residual) / norm;
        Ok((self.sse - c * c).max(T::zero()))
    }

    /// SSE after removing candidate `j`, without changing the fit.
    pub fn sse_without(&self, j: usize) -> Result<T> {
        if !self.contains(j) {
            return Ok(self.sse);
        }
        let pos = self.position(j)?;
        Ok(self.sse + self.drop_increment(pos))
    }

    /// Increase in SSE from dropping the member at `pos`:
    /// `β_pos² / ‖row pos of R⁻¹‖²` with `β = R⁻¹ c`.
    fn drop_increment(&self, pos: usize) -> T {
        let s = self.members.len();
        // Back substitution for β.
        let mut beta = self.coef.clone();
        for i in (0..s).rev() {
            let mut v = beta[i];
            for c in i + 1..s {
                v = v - self.r[c][i] * beta[c];
            }
            beta[i] = v / self.r[i][i];
        }
        // Row `pos` of R⁻¹: solve x R = e_pos.
        let mut x = vec![T::zero(); s];
        let mut norm2 = T::zero();
        for c in pos..s {
            let mut v = if c == pos { T::one() } else { T::zero() };
            for i in pos..c {
                v = v - x[i] * self.r[c][i];
            }
            x[c] = v / self.r[c][c];
            norm2 = norm2 + x[c] * x[c];
        }
        beta[pos] * beta[pos] / norm2
    }

    /// SSE increase from dropping each member, in member order.
    pub fn drop_increments(&self) -> Vec<T> {
        (0..self.members.len()).map(|p| self.drop_increment(p)).collect()
    }
}

fn parse_value<T: Real>(raw: &str, column: &str, row: usize) -> Result<T> {
    let s = raw.trim();
    let lower = s.to_ascii_lowercase();
    if s.is_empty() || matches!(lower.as_str(), "na" | "nan" | "null" | "n/a") {
        return Err(Error::Data(format!("column {column}, row {row}: missing value '{s}'")));
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .and_then(T::from_f64)
        .ok_or_else(|| Error::Data(format!("column {column}, row {row}: cannot parse '{s}' as a number")))
}

fn resolve(headers: &[String], c: &ColumnRef) -> Result<usize> {
    match c {
        ColumnRef::Index(i) if *i < headers.len() => Ok(*i),
        ColumnRef::Index(i) => Err(Error::Data(format!("column index {i} out of range ({} columns)", headers.len()))),
        ColumnRef::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("no column named '{name}'"))),
    }
}

/// Reads a UTF-8, comma-separated file with a header row.
pub fn load_csv<T: Real>(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); headers.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        for (c, raw) in record.iter().enumerate() {
            columns[c].push(parse_value(raw, &headers[c], r + 1)?);
        }
    }
    let y_idx = resolve(&headers, &opts.response)?;
    let fixed_idx: Vec<usize> = opts.fixed.iter().map(|c| resolve(&headers, c)).collect::<Result<_>>()?;
    let cand_idx: Vec<usize> = match &opts.candidates {
        Some(list) => list.iter().map(|c| resolve(&headers, c)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|i| *i != y_idx && !fixed_idx.contains(i)).collect(),
    };
    let mut used = vec![y_idx];
    for &i in fixed_idx.iter().chain(&cand_idx) {
        if used.contains(&i) {
            return Err(Error::Data(format!("column '{}' used more than once", headers[i])));
        }
        used.push(i);
    }
    let n = columns[y_idx].len();
    let is_constant = |c: &[T]| c.first().is_some_and(|&v0| v0 != T::zero() && c.iter().all(|&v| v == v0));
    let mut x0: Vec<Vec<T>> = Vec::new();
    let mut fixed_names = Vec::new();
    if !fixed_idx.iter().any(|&i| is_constant(&columns[i])) {
        x0.push(vec![T::one(); n]);
        fixed_names.push("(intercept)".to_string());
    }
    for &i in &fixed_idx {
        x0.push(columns[i].clone());
        fixed_names.push(headers[i].clone());
    }
    let mut x: Vec<Vec<T>> = cand_idx.iter().map(|&i| columns[i].clone()).collect();
    if opts.center {
        for col in &mut x {
            let mean = col.iter().copied().sum::<T>() / T::of(n.max(1));
            col.iter_mut().for_each(|v| *v = *v - mean);
        }
    }
    let names = cand_idx.iter().map(|&i| headers[i].clone()).collect();
    Dataset::with_names(columns[y_idx].clone(), x0, x, headers[y_idx].clone(), fixed_names, names)
}
