//! Dense containers and the index conventions shared by every map.
//!
//! Vectorization follows one rule everywhere: the **last mode varies fastest**.
//! A multi-index `(r₁, …, r_N)` (1-based) of a tensor with dims `(d₁, …, d_N)`
//! sits at linear position `1 + Σ (rₙ − 1)·sₙ` with strides `sₙ = ∏_{m>n} d_m`.
//! [`kron_vec`], the row order of [`khatri_rao`] and the [`DenseTensor`] layout
//! all use it, so column `j` of `A₁ ⊙ ⋯ ⊙ A_N` is exactly the Kronecker product
//! of the factor columns `j`.
//!
//! Mode numbers and multi-indices in the public API are 1-based. Element
//! accessors on [`DenseMatrix`] and [`Vector`] are ordinary 0-based Rust
//! indexing.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Self {
        Self(data)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// The `i`-th standard basis vector (0-based position).
    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[i] = 1.0;
        v
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Self(data)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `‖x‖₄⁴`
pub fn norm4_pow4(a: &[f64]) -> f64 {
    a.iter().map(|v| (v * v) * (v * v)).sum()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting bad lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                op: "DenseMatrix::new",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite matrix entry at position {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension {
                    op: "DenseMatrix::from_rows",
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                op: "matmul",
                expected: self.cols,
                got: other.rows,
            });
        }
        let n = other.cols;
        let mut out = Self::zeros(self.rows, n);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (p, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                axpy(a, other.row(p), out_row);
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension {
                op: "t_matmul",
                expected: self.rows,
                got: other.rows,
            });
        }
        let n = other.cols;
        let mut out = Self::zeros(self.cols, n);
        for p in 0..self.rows {
            let b = other.row(p);
            for (i, &a) in self.row(p).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                axpy(a, b, &mut out.data[i * n..(i + 1) * n]);
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_sq(&self.data).sqrt()
    }

    /// `‖self − other‖_F`
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension {
                op: "frobenius_distance",
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale_in_place(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape mismatch");
        axpy(1.0, &other.data, &mut self.data);
    }
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dense order-N tensor stored in multi-index order (last mode fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_dims(&dims)?;
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::Dimension {
                op: "DenseTensor::new",
                expected: len,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite tensor entry".into()));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let len = dims.iter().product();
        Ok(Self {
            dims,
            data: vec![0.0; len],
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Entry at a 1-based multi-index.
    pub fn get(&self, index: &[usize]) -> Result<f64> {
        let l = multi_index_to_linear(index, &self.dims)?;
        Ok(self.data[l - 1])
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm_sq(&self.data).sqrt()
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Argument("tensor needs at least one mode".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Argument(format!("zero-length mode in dims {dims:?}")));
    }
    Ok(())
}

/// Strides `sₙ = ∏_{m>n} d_m` (so `s_N = 1`).
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for n in (0..dims.len().saturating_sub(1)).rev() {
        s[n] = s[n + 1] * dims[n + 1];
    }
    s
}

/// Maps a 1-based multi-index to its 1-based linear position.
pub fn multi_index_to_linear(index: &[usize], dims: &[usize]) -> Result<usize> {
    if index.len() != dims.len() {
        return Err(Error::Dimension {
            op: "multi_index_to_linear",
            expected: dims.len(),
            got: index.len(),
        });
    }
    let mut linear = 1;
    for ((&r, &d), s) in index.iter().zip(dims).zip(strides(dims)) {
        if r == 0 || r > d {
            return Err(Error::Index {
                what: "multi-index component",
                index: r,
                bound: d,
            });
        }
        linear += (r - 1) * s;
    }
    Ok(linear)
}

/// Inverse of [`multi_index_to_linear`].
pub fn linear_to_multi_index(linear: usize, dims: &[usize]) -> Result<Vec<usize>> {
    let total: usize = dims.iter().product();
    if linear == 0 || linear > total {
        return Err(Error::Index {
            what: "linear index",
            index: linear,
            bound: total,
        });
    }
    let mut rest = linear - 1;
    Ok(strides(dims)
        .into_iter()
        .map(|s| {
            let r = rest / s;
            rest %= s;
            r + 1
        })
        .collect())
}

/// `v₁ ⊗ v₂ ⊗ ⋯ ⊗ v_N`, last factor fastest.
pub fn kron_vec<V: AsRef<[f64]>>(vs: &[V]) -> Result<Vector> {
    let (first, rest) = vs
        .split_first()
        .ok_or_else(|| Error::Argument("kron_vec needs at least one vector".into()))?;
    let mut acc = first.as_ref().to_vec();
    for v in rest {
        let v = v.as_ref();
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for &a in &acc {
            next.extend(v.iter().map(|b| a * b));
        }
        acc = next;
    }
    Ok(Vector(acc))
}

/// Column-wise Kronecker product: `(I×K) ⊙ (J×K) → (I·J)×K` with
/// `out[i·J + j′, c] = A[i, c]·B[j′, c]` (0-based).
pub fn khatri_rao(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.cols {
        return Err(Error::Dimension {
            op: "khatri_rao",
            expected: a.cols,
            got: b.cols,
        });
    }
    let k = a.cols;
    let mut out = DenseMatrix::zeros(a.rows * b.rows, k);
    for i in 0..a.rows {
        let ar = a.row(i);
        for jp in 0..b.rows {
            let br = b.row(jp);
            let orow = out.row_mut(i * b.rows + jp);
            for c in 0..k {
                orow[c] = ar[c] * br[c];
            }
        }
    }
    Ok(out)
}

/// `A₁ ⊙ A₂ ⊙ ⋯ ⊙ A_N`
pub fn khatri_rao_all(factors: &[DenseMatrix]) -> Result<DenseMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Argument("khatri_rao_all needs at least one factor".into()))?;
    rest.iter().try_fold(first.clone(), |acc, f| khatri_rao(&acc, f))
}

fn check_mode(t: &DenseTensor, n: usize) -> Result<()> {
    if n == 0 || n > t.order() {
        return Err(Error::Index {
            what: "mode",
            index: n,
            bound: t.order(),
        });
    }
    Ok(())
}

/// Splits dims around mode `n` (1-based) into `(left, mid, right)` extents.
fn mode_extents(dims: &[usize], n: usize) -> (usize, usize, usize) {
    let left = dims[..n - 1].iter().product();
    let right = dims[n..].iter().product();
    (left, dims[n - 1], right)
}

/// Mode-`n` unfolding (1-based `n`): a `dₙ × ∏_{m≠n} d_m` matrix whose row
/// `i` holds all entries with `rₙ = i`. Columns follow the multi-index
/// order of the remaining modes (ascending, last fastest).
pub fn mode_n_unfold(t: &DenseTensor, n: usize) -> Result<DenseMatrix> {
    check_mode(t, n)?;
    let (left, mid, right) = mode_extents(&t.dims, n);
    let cols = left * right;
    let mut out = DenseMatrix::zeros(mid, cols);
    for l in 0..left {
        for i in 0..mid {
            let src = &t.data[(l * mid + i) * right..(l * mid + i + 1) * right];
            out.data[i * cols + l * right..i * cols + (l + 1) * right].copy_from_slice(src);
        }
    }
    Ok(out)
}

/// Inverse of [`mode_n_unfold`] for the given target dims.
pub fn mode_n_fold(m: &DenseMatrix, n: usize, dims: &[usize]) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(dims.to_vec())?;
    check_mode(&t, n)?;
    let (left, mid, right) = mode_extents(dims, n);
    if m.rows != mid || m.cols != left * right {
        return Err(Error::Dimension {
            op: "mode_n_fold",
            expected: mid * left * right,
            got: m.rows * m.cols,
        });
    }
    let cols = m.cols;
    for l in 0..left {
        for i in 0..mid {
            t.data[(l * mid + i) * right..(l * mid + i + 1) * right]
                .copy_from_slice(&m.data[i * cols + l * right..i * cols + (l + 1) * right]);
        }
    }
    Ok(t)
}

/// Mode-`n` product `t ×ₙ M` for `M` of shape `J × dₙ`; mode `n` of the
/// result has extent `J`.
pub fn mode_n_product(t: &DenseTensor, n: usize, m: &DenseMatrix) -> Result<DenseTensor> {
    check_mode(t, n)?;
    let (left, mid, right) = mode_extents(&t.dims, n);
    if m.cols != mid {
        return Err(Error::Dimension {
            op: "mode_n_product",
            expected: mid,
            got: m.cols,
        });
    }
    let j_ext = m.rows;
    let mut dims = t.dims.clone();
    dims[n - 1] = j_ext;
    let mut data = vec![0.0; left * j_ext * right];
    for l in 0..left {
        for j in 0..j_ext {
            let out = &mut data[(l * j_ext + j) * right..(l * j_ext + j + 1) * right];
            for (i, &w) in m.row(j).iter().enumerate() {
                if w != 0.0 {
                    axpy(w, &t.data[(l * mid + i) * right..(l * mid + i + 1) * right], out);
                }
            }
        }
    }
    Ok(DenseTensor { dims, data })
}

/// Thin QR factors from [`qr_orthonormal`].
///
/// `q` is `m × rank` with orthonormal columns spanning `range(M)`, `r` is
/// `rank × k` and `q · r` reproduces `M`. A column whose residual after the
/// previous reflections falls below `1e−12·‖M‖_F` is treated as dependent and
/// contributes no new direction.
#[derive(Debug, Clone)]
pub struct Qr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub rank: usize,
}

impl Qr {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.r.cols
    }
}

pub const RANK_TOLERANCE: f64 = 1e-12;

/// Householder QR of a tall matrix (`m ≥ k`).
pub fn qr_orthonormal(mat: &DenseMatrix) -> Result<Qr> {
    let (m, k) = mat.shape();
    if m < k {
        return Err(Error::Dimension {
            op: "qr_orthonormal (rows must be >= cols)",
            expected: k,
            got: m,
        });
    }
    let tol = RANK_TOLERANCE * mat.frobenius_norm();
    // Column-major working copy: each column is contiguous.
    let mut w: Vec<Vec<f64>> = (0..k).map(|j| mat.column(j).into_inner()).collect();
    let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(k);
    let mut rank = 0;

    for j in 0..k {
        if rank == m {
            break;
        }
        let p = rank;
        let norm = norm_sq(&w[j][p..]).sqrt();
        if norm <= tol || norm == 0.0 {
            continue;
        }
        let x0 = w[j][p];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = w[j][p..].to_vec();
        v[0] -= alpha;
        let vnorm = norm_sq(&v);
        if vnorm == 0.0 {
            rank += 1;
            continue;
        }
        let beta = 2.0 / vnorm;
        for col in w.iter_mut() {
            apply_reflector(&v, beta, &mut col[p..]);
        }
        w[j][p] = alpha;
        for val in &mut w[j][p + 1..] {
            *val = 0.0;
        }
        reflectors.push((p, v, beta));
        rank += 1;
    }

    let mut r = DenseMatrix::zeros(rank, k);
    for (j, col) in w.iter().enumerate() {
        for (i, &v) in col.iter().take(rank).enumerate() {
            r.set(i, j, v);
        }
    }

    let mut q_cols: Vec<Vec<f64>> = (0..rank)
        .map(|c| {
            let mut e = vec![0.0; m];
            e[c] = 1.0;
            e
        })
        .collect();
    for (p, v, beta) in reflectors.iter().rev() {
        for col in q_cols.iter_mut() {
            apply_reflector(v, *beta, &mut col[*p..]);
        }
    }
    let mut q = DenseMatrix::zeros(m, rank);
    for (c, col) in q_cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q.set(i, c, v);
        }
    }
    Ok(Qr { q, r, rank })
}

#[inline]
fn apply_reflector(v: &[f64], beta: f64, x: &mut [f64]) {
    let s = beta * dot(v, x);
    if s != 0.0 {
        axpy(-s, v, x);
    }
}
