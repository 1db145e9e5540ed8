//! Dense symmetric and positive-definite matrix routines.
//!
//! [`SymmetricMatrix`] stores only the upper triangle (column-packed), so
//! symmetry holds by construction. [`DataMatrix`] holds an `n × p` sample in
//! row-major order.

#![allow(clippy::needless_range_loop)]

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative pivot floor used by [`cholesky`].
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

/// Dense `p × p` real symmetric matrix with packed upper-triangular storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    packed: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            packed: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite { row: i, col: i });
            }
            m.set(i, i, d);
        }
        Ok(m)
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle `i ≤ j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for i in 0..=j {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                m.packed[packed_index(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Builds a matrix from full rows. The rows must be square and symmetric
    /// up to a relative tolerance of `1e-12`; the upper triangle is kept.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Self::from_fn(dim, |i, j| rows[i][j])
    }

    /// Builds a matrix from a row-major dense buffer, averaging `(i, j)` and `(j, i)`.
    pub(crate) fn from_dense_averaged(dim: usize, dense: &[f64]) -> Result<Self> {
        debug_assert_eq!(dense.len(), dim * dim);
        Self::from_fn(dim, |i, j| 0.5 * (dense[i * dim + j] + dense[j * dim + i]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        self.packed[packed_index(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.dim && j < self.dim, "index out of bounds");
        assert!(value.is_finite(), "symmetric matrix entries must be finite");
        self.packed[packed_index(i, j)] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Full row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let p = self.dim;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                out[i * p + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Iterator over `(i, j, value)` for the strict upper triangle.
    pub fn upper_off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..self.dim).flat_map(move |j| (0..j).map(move |i| (i, j, self.get(i, j))))
    }

    pub fn max_abs_off_diagonal(&self) -> f64 {
        self.upper_off_diagonal()
            .map(|(_, _, v)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Mean of `|m_ij|` over `i ≠ j`; zero for `p < 2`.
    pub fn mean_abs_off_diagonal(&self) -> f64 {
        let count = self.dim * self.dim.saturating_sub(1) / 2;
        if count == 0 {
            return 0.0;
        }
        self.upper_off_diagonal()
            .map(|(_, _, v)| v.abs())
            .sum::<f64>()
            / count as f64
    }

    /// Number of nonzero entries in the strict upper triangle.
    pub fn off_diagonal_nonzeros(&self) -> usize {
        self.upper_off_diagonal()
            .filter(|&(_, _, v)| v != 0.0)
            .count()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            packed: self.packed.iter().map(|v| v * factor).collect(),
        }
    }

    /// Returns `self + shift·I`.
    pub fn add_diagonal(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.set(i, i, self.get(i, i) + shift);
        }
        out
    }

    /// Dense product `self · other` (generally not symmetric), row-major.
    pub fn matmul(&self, other: &SymmetricMatrix) -> Result<Vec<f64>> {
        check_dims(self.dim, other.dim)?;
        let p = self.dim;
        let a = self.to_dense();
        let b = other.to_dense();
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for k in 0..p {
                let aik = a[i * p + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..p {
                    out[i * p + j] += aik * b[k * p + j];
                }
            }
        }
        Ok(out)
    }

    /// `max |m_ij|` over all entries of `self − other`.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .packed
            .iter()
            .zip(&other.packed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SymmetricMatrix", 2)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("data", &self.to_dense())?;
        s.end()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// An `n × p` observation matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), p, data)
    }

    pub fn from_row_major(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "at least 2 observations are required, got {n}"
            )));
        }
        if p == 0 {
            return Err(Error::InvalidArgument("data has no variables".into()));
        }
        check_dims(n * p, data.len())?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / p,
                col: pos % p,
            });
        }
        Ok(Self { n, p, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    /// Sub-sample made of the given row indices, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            if i >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.n
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::from_row_major(indices.len(), self.p, data)
    }
}

/// Maximum-likelihood covariance `(1/n) Σ (xᵢ − x̄)(xᵢ − x̄)ᵀ`.
///
/// With `center = false` the mean is taken to be zero. The divisor is always `n`.
pub fn sample_covariance(x: &DataMatrix, center: bool) -> SymmetricMatrix {
    let (n, p) = (x.n(), x.p());
    let mut mean = vec![0.0; p];
    if center {
        for row in x.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
    }
    let mut acc = vec![0.0; p * (p + 1) / 2];
    let mut dev = vec![0.0; p];
    for row in x.rows() {
        for k in 0..p {
            dev[k] = row[k] - mean[k];
        }
        for j in 0..p {
            let dj = dev[j];
            let base = j * (j + 1) / 2;
            for i in 0..=j {
                acc[base + i] += dev[i] * dj;
            }
        }
    }
    for v in &mut acc {
        *v /= n as f64;
    }
    SymmetricMatrix {
        dim: p,
        packed: acc,
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = M`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangularFactor {
    dim: usize,
    // row-major, full square storage; entries above the diagonal are zero
    data: Vec<f64>,
}

impl LowerTriangularFactor {
    /// Builds a factor from row-major entries; the strict upper part is ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = vec![0.0; dim * dim];
        for (i, row) in rows.iter().enumerate() {
            check_dims(dim, row.len())?;
            data[i * dim..i * dim + i + 1].copy_from_slice(&row[..=i]);
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.data[i * self.dim + j]
        }
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// `L · z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..=i).map(|k| self.data[i * self.dim + k] * z[k]).sum())
            .collect()
    }

    /// `L · Lᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let p = self.dim;
        let mut out = SymmetricMatrix::zeros(p);
        for j in 0..p {
            for i in 0..=j {
                let s: f64 = (0..=i).map(|k| self.get(i, k) * self.get(j, k)).sum();
                out.set(i, j, s);
            }
        }
        out
    }

    /// Solves `L · y = b` in place.
    fn forward_solve(&self, b: &mut [f64]) {
        let p = self.dim;
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.data[i * p + k] * b[k];
            }
            b[i] = s / self.data[i * p + i];
        }
    }

    /// Solves `Lᵀ · x = y` in place.
    fn backward_solve(&self, b: &mut [f64]) {
        let p = self.dim;
        for i in (0..p).rev() {
            let mut s = b[i];
            for k in i + 1..p {
                s -= self.data[k * p + i] * b[k];
            }
            b[i] = s / self.data[i * p + i];
        }
    }

    /// Solves `L·Lᵀ · x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_solve(&mut x);
        self.backward_solve(&mut x);
        x
    }
}

/// Cholesky factorization. Fails when a pivot drops to
/// `PIVOT_TOLERANCE × max diagonal` or below.
pub fn cholesky(m: &SymmetricMatrix) -> Result<LowerTriangularFactor> {
    let p = m.dim();
    let max_diag = m.diagonal().into_iter().fold(0.0, f64::max);
    let floor = PIVOT_TOLERANCE * max_diag;
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[j * p + j] = ljj;
        for i in j + 1..p {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / ljj;
        }
    }
    Ok(LowerTriangularFactor { dim: p, data: l })
}

/// `log |M|` via Cholesky.
pub fn log_det(m: &SymmetricMatrix) -> Result<f64> {
    Ok(cholesky(m)?.log_det())
}

/// Inverse of a positive-definite matrix.
pub fn inverse_spd(m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let factor = cholesky(m)?;
    Ok(inverse_from_factor(&factor))
}

pub(crate) fn inverse_from_factor(factor: &LowerTriangularFactor) -> SymmetricMatrix {
    let p = factor.dim();
    let mut dense = vec![0.0; p * p];
    let mut col = vec![0.0; p];
    for j in 0..p {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[j] = 1.0;
        factor.forward_solve(&mut col);
        factor.backward_solve(&mut col);
        for i in 0..p {
            dense[i * p + j] = col[i];
        }
    }
    SymmetricMatrix::from_dense_averaged(p, &dense).expect("inverse of a PD matrix is finite")
}

/// `tr(A·B) = Σ_ij A_ij B_ij` for symmetric `A`, `B`.
pub fn trace_product(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let p = a.dim();
    let mut s = 0.0;
    for j in 0..p {
        for i in 0..j {
            s += 2.0 * a.get(i, j) * b.get(i, j);
        }
        s += a.get(j, j) * b.get(j, j);
    }
    Ok(s)
}
