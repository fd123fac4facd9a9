//! Square real matrices (dense or CSR), matrix-vector products, the
//! truncated exponential series applied to a vector, the scalar Padé [3/3]
//! exponential and Google-matrix construction.

use crate::error::{check_len, Error, Result};

/// Matrices up to this dimension are stored densely when the storage is
/// chosen automatically; larger ones use CSR.
pub const DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major `n * n` entries.
    Dense(Vec<f64>),
    Csr {
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

/// A square real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    storage: Storage,
}

fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

impl Matrix {
    /// Dense matrix from row-major data of length `n * n`.
    pub fn dense(n: usize, data: Vec<f64>) -> Result<Self> {
        check_len(n * n, data.len())?;
        ensure_finite(&data, "matrix entries")?;
        Ok(Self {
            n,
            storage: Storage::Dense(data),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            check_len(n, row.len())?;
            data.extend_from_slice(row);
        }
        Self::dense(n, data)
    }

    /// CSR matrix. Offsets must be monotone with `offsets[n] == nnz`; column
    /// indices within a row need not be sorted but must be in range.
    pub fn csr(n: usize, offsets: Vec<usize>, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_len(n + 1, offsets.len())?;
        check_len(indices.len(), values.len())?;
        if offsets[0] != 0 || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("CSR offsets must be monotone from 0".into()));
        }
        if offsets[n] != values.len() {
            return Err(Error::InvalidParameter(format!(
                "final CSR offset {} does not equal nnz {}",
                offsets[n],
                values.len()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&j| j >= n) {
            return Err(Error::NodeOutOfRange { id: bad, n });
        }
        ensure_finite(&values, "matrix entries")?;
        Ok(Self {
            n,
            storage: Storage::Csr {
                offsets,
                indices,
                values,
            },
        })
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates. Storage is
    /// dense for `n <= DENSE_LIMIT` and CSR above.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            let bad = if i >= n { Some(i) } else if j >= n { Some(j) } else { None };
            if let Some(id) = bad {
                return Err(Error::NodeOutOfRange { id, n });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("matrix entries".into()));
            }
        }
        if n <= DENSE_LIMIT {
            let mut data = vec![0.0; n * n];
            for &(i, j, v) in triplets {
                data[i * n + j] += v;
            }
            return Self::dense(n, data);
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut offsets = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            indices.push(j);
            values.push(v);
            offsets[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Self::csr(n, offsets, indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n]).expect("identity is finite")
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::dense(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Csr { .. })
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Csr { values, .. } => values.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Csr {
                offsets,
                indices,
                values,
            } => (offsets[i]..offsets[i + 1])
                .filter(|&k| indices[k] == j)
                .map(|k| values[k])
                .sum(),
        }
    }

    /// Row-major dense copy of the entries.
    pub fn to_dense_vec(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Csr {
                offsets,
                indices,
                values,
            } => {
                let mut out = vec![0.0; self.n * self.n];
                for i in 0..self.n {
                    for k in offsets[i]..offsets[i + 1] {
                        out[i * self.n + indices[k]] += values[k];
                    }
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> Self {
        Self {
            n: self.n,
            storage: Storage::Dense(self.to_dense_vec()),
        }
    }

    /// CSR copy that keeps only nonzero entries.
    pub fn to_csr(&self) -> Self {
        let dense = self.to_dense_vec();
        let n = self.n;
        let mut offsets = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets[i + 1] = values.len();
        }
        Self {
            n,
            storage: Storage::Csr {
                offsets,
                indices,
                values,
            },
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let d = self.to_dense_vec();
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = d[i * n + j];
            }
        }
        let dense = Self {
            n,
            storage: Storage::Dense(t),
        };
        if self.is_sparse() {
            dense.to_csr()
        } else {
            dense
        }
    }

    /// Smallest and largest entry, counting implicit CSR zeros.
    pub fn min_max(&self) -> (f64, f64) {
        let (lo, hi, stored) = match &self.storage {
            Storage::Dense(d) => (d.iter().copied().fold(f64::INFINITY, f64::min), d.iter().copied().fold(f64::NEG_INFINITY, f64::max), d.len()),
            Storage::Csr { values, .. } => (
                values.iter().copied().fold(f64::INFINITY, f64::min),
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                values.len(),
            ),
        };
        if self.n == 0 {
            return (0.0, 0.0);
        }
        if stored < self.n * self.n {
            (lo.min(0.0), hi.max(0.0))
        } else {
            (lo, hi)
        }
    }

    /// Applies `f` to every entry (implicit zeros included) and returns a
    /// dense matrix.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let data = self.to_dense_vec().into_iter().map(f).collect();
        Self::dense(self.n, data)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A + A^T|` over all entries.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.to_dense_vec();
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((d[i * n + j] + d[j * n + i]).abs());
            }
        }
        worst
    }

    /// First negative entry, if any.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        (0..self.n).find_map(|i| self.row(i).find(|&(_, v)| v < 0.0).map(|(j, v)| (i, j, v)))
    }

    /// `Δ(x) A`: row `i` scaled by `x[i]`.
    pub fn scale_rows(&self, x: &[f64]) -> Result<Self> {
        check_len(self.n, x.len())?;
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(d) => {
                for (i, row) in d.chunks_mut(self.n.max(1)).enumerate() {
                    row.iter_mut().for_each(|v| *v *= x[i]);
                }
            }
            Storage::Csr { offsets, values, .. } => {
                for i in 0..self.n {
                    for v in &mut values[offsets[i]..offsets[i + 1]] {
                        *v *= x[i];
                    }
                }
            }
        }
        ensure_finite(&out.to_dense_vec(), "scaled matrix")?;
        Ok(out)
    }

    /// Stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.storage {
            Storage::Dense(d) => Box::new(d[i * self.n..(i + 1) * self.n].iter().copied().enumerate()),
            Storage::Csr {
                offsets,
                indices,
                values,
            } => Box::new((offsets[i]..offsets[i + 1]).map(move |k| (indices[k], values[k]))),
        }
    }

    /// `A x`, summing each row sequentially.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        match &self.storage {
            Storage::Dense(d) => {
                for (yi, row) in y.iter_mut().zip(d.chunks(self.n.max(1))) {
                    let mut acc = 0.0;
                    for (a, b) in row.iter().zip(x) {
                        acc += a * b;
                    }
                    *yi = acc;
                }
            }
            Storage::Csr {
                offsets,
                indices,
                values,
            } => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for k in offsets[i]..offsets[i + 1] {
                        acc += values[k] * x[indices[k]];
                    }
                    *yi = acc;
                }
            }
        }
    }

    /// `A^T x`.
    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut y = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }
}

/// Applies the truncated exponential series `sum_{k=0}^{m} (alpha A)^k x / k!`
/// using the term recurrence `t_k = (alpha / k) A t_{k-1}`; `A^k` is never
/// formed.
pub fn truncated_exp_apply(a: &Matrix, alpha: f64, m: usize, x: &[f64]) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    check_len(a.n(), x.len())?;
    let mut term = x.to_vec();
    let mut sum = x.to_vec();
    let mut next = vec![0.0; x.len()];
    for k in 1..=m {
        a.matvec_into(&term, &mut next);
        let f = alpha / k as f64;
        for ((t, s), nv) in term.iter_mut().zip(sum.iter_mut()).zip(&next) {
            *t = f * nv;
            *s += *t;
        }
        if term.iter().chain(sum.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NumericalRange(format!("exponential series overflowed at term {k}")));
        }
    }
    Ok(sum)
}

/// Result of [`exp_apply_adaptive`].
#[derive(Debug, Clone)]
pub struct SeriesApply {
    pub value: Vec<f64>,
    /// Highest term order included.
    pub order: usize,
}

/// Grows the truncation order until the latest term's Euclidean norm falls
/// below `rel_tol` times the accumulated sum (and the order exceeds
/// `alpha * ||A||_inf`, past which terms decay monotonically).
pub fn exp_apply_adaptive(a: &Matrix, alpha: f64, x: &[f64], rel_tol: f64, max_order: usize) -> Result<SeriesApply> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    check_len(a.n(), x.len())?;
    let min_order = (alpha * a.norm_inf()).ceil() as usize;
    let mut term = x.to_vec();
    let mut sum = x.to_vec();
    let mut next = vec![0.0; x.len()];
    for k in 1..=max_order {
        a.matvec_into(&term, &mut next);
        let f = alpha / k as f64;
        for ((t, s), nv) in term.iter_mut().zip(sum.iter_mut()).zip(&next) {
            *t = f * nv;
            *s += *t;
        }
        if sum.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalRange(format!("exponential series overflowed at term {k}")));
        }
        let tn = norm2(&term);
        if k >= min_order && tn <= rel_tol * norm2(&sum) {
            return Ok(SeriesApply { value: sum, order: k });
        }
    }
    Err(Error::NumericalRange(format!(
        "exponential series did not reach relative tolerance {rel_tol:e} within {max_order} terms"
    )))
}

/// Padé [3/3] approximant of `exp(x)`.
pub fn pade33_exp(x: f64) -> Result<f64> {
    let x2 = x * x;
    let x3 = x2 * x;
    let num = 120.0 + 60.0 * x + 12.0 * x2 + x3;
    let den = 120.0 - 60.0 * x + 12.0 * x2 - x3;
    if !(den.abs() > 1e-12) {
        return Err(Error::PoleProximity(x));
    }
    Ok(num / den)
}

/// Google matrix `d S + (1 - d)/n 11^T`, with `S[dst][src] = 1/outdeg(src)`
/// (parallel edges add weight) and dangling columns replaced by `1/n`.
/// Edge endpoints are 0-based.
pub fn google_matrix(edges: &[(usize, usize)], n: usize, damping: f64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidParameter(format!("damping must lie in (0, 1), got {damping}")));
    }
    let mut outdeg = vec![0usize; n];
    for &(s, d) in edges {
        for id in [s, d] {
            if id >= n {
                return Err(Error::NodeOutOfRange { id, n });
            }
        }
        outdeg[s] += 1;
    }
    let teleport = (1.0 - damping) / n as f64;
    let uniform = 1.0 / n as f64;
    let mut data = vec![teleport; n * n];
    for (j, &deg) in outdeg.iter().enumerate() {
        if deg == 0 {
            for i in 0..n {
                data[i * n + j] = uniform;
            }
        }
    }
    for &(s, d) in edges {
        data[d * n + s] += damping / outdeg[s] as f64;
    }
    Matrix::dense(n, data)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
