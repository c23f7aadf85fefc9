//! Dense tensors and matrices plus the multilinear operations used by the
//! sampling and recovery code.
//!
//! Both containers use a column-major style linearization: for a tensor with
//! dims `(N_1, .., N_d)` the entry `(i_1, .., i_d)` (0-based) lives at
//! `i_1 + N_1 * (i_2 + N_2 * (i_3 + ..))`, so the first mode varies fastest.
//! A matrix stores entry `(r, c)` at `r + rows * c`, which makes a 2-mode
//! tensor and the matrix of the same shape share one buffer layout.
//!
//! Mode indices are 0-based throughout the API.

use crate::error::{Error, Result};

/// Dense real matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + n * i] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dims("ragged rows"));
        }
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.data[i + r * j] = v;
            }
        }
        Ok(m)
    }

    pub fn from_diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i + n * i] = v;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::dims(format!(
                    "column of length {} for {rows} rows",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + self.rows * c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r + self.rows * c] = v;
    }

    #[inline]
    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, c: usize) -> &mut [f64] {
        let r = self.rows;
        &mut self.data[c * r..(c + 1) * r]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                t.data[c + self.cols * r] = self.data[r + self.rows * c];
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (p, &b) in other.column(j).iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.column(p), dst);
                }
            }
        }
        Ok(out)
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (c, &xc) in x.iter().enumerate() {
            if xc != 0.0 {
                axpy(xc, self.column(c), out);
            }
        }
    }

    /// `out = self^T * y`.
    pub fn matvec_t_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (c, o) in out.iter_mut().enumerate() {
            *o = dot(self.column(c), y);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dims(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::dims(format!(
                "vector of length {} for {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        self.matvec_t_into(y, &mut out);
        Ok(out)
    }

    /// Submatrix made of the listed columns.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for &c in cols {
            data.extend_from_slice(self.column(c));
        }
        DenseMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims("matrix shapes differ"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        l2_norm(&self.data)
    }

    /// View as a 2-mode tensor (same buffer layout).
    pub fn to_tensor(&self) -> DenseTensor {
        DenseTensor {
            dims: vec![self.rows, self.cols],
            data: self.data.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense d-mode real tensor; the first mode varies fastest in `data`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_dims(&dims)?;
        let n: usize = dims.iter().product();
        if data.len() != n {
            return Err(Error::dims(format!(
                "{} values for dims {:?}",
                data.len(),
                dims
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        validate_dims(&dims)?;
        let n = dims.iter().product();
        Ok(Self {
            dims,
            data: vec![0.0; n],
        })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let mut idx = vec![0usize; t.dims.len()];
        for v in t.data.iter_mut() {
            *v = f(&idx);
            for (i, n) in idx.iter_mut().zip(&t.dims) {
                *i += 1;
                if *i < *n {
                    break;
                }
                *i = 0;
            }
        }
        Ok(t)
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut lin = 0;
        for (&i, &n) in idx.iter().zip(&self.dims).rev() {
            lin = lin * n + i;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let l = self.linear_index(idx);
        self.data[l] = v;
    }

    /// Interprets a 2-mode tensor as a matrix.
    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::dims(format!(
                "expected a 2-mode tensor, got dims {:?}",
                self.dims
            )));
        }
        DenseMatrix::from_col_major(self.dims[0], self.dims[1], self.data.clone())
    }

    pub fn frobenius_norm(&self) -> f64 {
        l2_norm(&self.data)
    }

    pub fn scaled(&self, alpha: f64) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(Error::dims(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::arg("a tensor needs at least one mode"));
    }
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::arg(format!("zero-length mode in dims {dims:?}")));
    }
    Ok(())
}

fn check_mode(x: &DenseTensor, mode: usize) -> Result<()> {
    if mode >= x.order() {
        return Err(Error::InvalidMode {
            mode,
            order: x.order(),
        });
    }
    Ok(())
}

/// Sizes of the blocks before and after `mode` in the linearization.
fn split_at_mode(dims: &[usize], mode: usize) -> (usize, usize) {
    let left = dims[..mode].iter().product();
    let right = dims[mode + 1..].iter().product();
    (left, right)
}

/// Mode-`mode` product `X ×_mode U`: contracts mode `mode` of `x` with the
/// columns of `u`, replacing `N_mode` by `u.rows()`.
pub fn mode_product(x: &DenseTensor, u: &DenseMatrix, mode: usize) -> Result<DenseTensor> {
    check_mode(x, mode)?;
    let n = x.dims[mode];
    if u.cols() != n {
        return Err(Error::dims(format!(
            "mode-{mode} product needs {n} columns, matrix has {}",
            u.cols()
        )));
    }
    let j_out = u.rows();
    let (left, right) = split_at_mode(&x.dims, mode);
    let mut dims = x.dims.clone();
    dims[mode] = j_out;
    let mut out = vec![0.0; left * j_out * right];
    for b in 0..right {
        for alpha in 0..n {
            let src = &x.data[left * (alpha + n * b)..left * (alpha + n * b + 1)];
            for j in 0..j_out {
                let coef = u.get(j, alpha);
                if coef != 0.0 {
                    let start = left * (j + j_out * b);
                    axpy(coef, src, &mut out[start..start + left]);
                }
            }
        }
    }
    Ok(DenseTensor { dims, data: out })
}

/// Applies `mats[i]` along mode `i` for every mode, in increasing mode order.
pub fn multi_mode_product(x: &DenseTensor, mats: &[DenseMatrix]) -> Result<DenseTensor> {
    if mats.len() != x.order() {
        return Err(Error::dims(format!(
            "{} matrices for a tensor of order {}",
            mats.len(),
            x.order()
        )));
    }
    let mut cur = x.clone();
    for (i, u) in mats.iter().enumerate() {
        cur = mode_product(&cur, u, i)?;
    }
    Ok(cur)
}

/// Mode-`mode` unfolding: an `N_mode x prod_{j != mode} N_j` matrix whose
/// columns are the mode fibers, with the remaining modes in ascending order
/// and the lowest one varying fastest.
pub fn unfold(x: &DenseTensor, mode: usize) -> Result<DenseMatrix> {
    check_mode(x, mode)?;
    let n = x.dims[mode];
    let (left, right) = split_at_mode(&x.dims, mode);
    let cols = left * right;
    let mut m = DenseMatrix::zeros(n, cols);
    for b in 0..right {
        for alpha in 0..n {
            let base = left * (alpha + n * b);
            for a in 0..left {
                m.data[alpha + n * (a + left * b)] = x.data[base + a];
            }
        }
    }
    Ok(m)
}

/// Inverse of [`unfold`].
pub fn fold(m: &DenseMatrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    validate_dims(dims)?;
    if mode >= dims.len() {
        return Err(Error::InvalidMode {
            mode,
            order: dims.len(),
        });
    }
    let n = dims[mode];
    let (left, right) = split_at_mode(dims, mode);
    if m.rows() != n || m.cols() != left * right {
        return Err(Error::dims(format!(
            "cannot fold a {}x{} matrix along mode {mode} into {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    let mut data = vec![0.0; n * left * right];
    for b in 0..right {
        for alpha in 0..n {
            let base = left * (alpha + n * b);
            for a in 0..left {
                data[base + a] = m.data[alpha + n * (a + left * b)];
            }
        }
    }
    Ok(DenseTensor {
        dims: dims.to_vec(),
        data,
    })
}

/// Kronecker product `A ⊗ B`.
pub fn kronecker(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let rows = ar * br;
    let mut out = DenseMatrix::zeros(rows, ac * bc);
    for q in 0..ac {
        for s in 0..bc {
            let col = &mut out.data[(q * bc + s) * rows..(q * bc + s + 1) * rows];
            for p in 0..ar {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let dst = &mut col[p * br..(p + 1) * br];
                for (d, &bv) in dst.iter_mut().zip(b.column(s)) {
                    *d = apq * bv;
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of matrices, `mats[0] ⊗ mats[1] ⊗ ...`.
pub fn kronecker_chain(mats: &[&DenseMatrix]) -> Result<DenseMatrix> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::arg("empty Kronecker chain"))?;
    Ok(rest
        .iter()
        .fold((*first).clone(), |acc, m| kronecker(&acc, m)))
}

/// Rank-one tensor `v_1 ∘ v_2 ∘ .. ∘ v_d`.
pub fn outer(vectors: &[&[f64]]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return Err(Error::arg("outer product of an empty list"));
    }
    let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
    validate_dims(&dims)?;
    let mut data = vectors[0].to_vec();
    for v in &vectors[1..] {
        let mut next = Vec::with_capacity(data.len() * v.len());
        for &s in v.iter() {
            next.extend(data.iter().map(|&d| d * s));
        }
        data = next;
    }
    Ok(DenseTensor { dims, data })
}

/// Adds `alpha * (v_1 ∘ .. ∘ v_d)` into `acc` without materializing the term.
pub fn add_outer_into(acc: &mut DenseTensor, alpha: f64, vectors: &[&[f64]]) -> Result<()> {
    if vectors.len() != acc.order() || vectors.iter().zip(&acc.dims).any(|(v, &n)| v.len() != n) {
        return Err(Error::dims("rank-one term does not match accumulator dims"));
    }
    let term = outer(vectors)?;
    axpy(alpha, &term.data, &mut acc.data);
    Ok(())
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    // scaled accumulation keeps tiny and huge entries from under/overflowing
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

pub fn frobenius_norm(x: &DenseTensor) -> f64 {
    x.frobenius_norm()
}

/// Number of entries with `|x| > tol`.
pub fn count_nonzeros(x: &DenseTensor, tol: f64) -> usize {
    x.data.iter().filter(|v| v.abs() > tol).count()
}

/// Default absolute tolerance for zero tests.
pub const ZERO_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four independent accumulators so the loop vectorizes
    let n = a.len().min(b.len());
    let (ha, ta) = a[..n].split_at(n - n % 4);
    let (hb, tb) = b[..n].split_at(n - n % 4);
    let mut acc = [0.0f64; 4];
    for (ca, cb) in ha.chunks_exact(4).zip(hb.chunks_exact(4)) {
        for l in 0..4 {
            acc[l] += ca[l] * cb[l];
        }
    }
    let tail: f64 = ta.iter().zip(tb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_tensor(dims: Vec<usize>) -> DenseTensor {
        let n: usize = dims.iter().product();
        DenseTensor::new(dims, (1..=n).map(|v| v as f64).collect()).unwrap()
    }

    // small deterministic pseudo-random fill, independent of the crate RNG
    fn lcg_tensor(dims: Vec<usize>, mut state: u64) -> DenseTensor {
        let n: usize = dims.iter().product();
        let data = (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        DenseTensor::new(dims, data).unwrap()
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let t = lcg_tensor(vec![rows, cols], seed);
        t.to_matrix().unwrap()
    }

    #[test]
    fn identity_mode_product_is_noop() {
        let x = lcg_tensor(vec![2, 2], 3);
        let y = mode_product(&x, &DenseMatrix::identity(2), 0).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn mode_product_column_sums() {
        // [[1,2],[3,4]] times [[1,1]] along mode 1 -> [[4,6]]
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]])
            .unwrap()
            .to_tensor();
        let u = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let y = mode_product(&x, &u, 0).unwrap();
        assert_eq!(y.dims(), &[1, 2]);
        assert_eq!(y.data(), &[4.0, 6.0]);
    }

    #[test]
    fn matrix_mode_products_match_u1_x_u2t() {
        let x = lcg_matrix(3, 4, 11);
        let u1 = lcg_matrix(2, 3, 12);
        let u2 = lcg_matrix(5, 4, 13);
        let via_modes =
            mode_product(&mode_product(&x.to_tensor(), &u1, 0).unwrap(), &u2, 1).unwrap();
        let direct = u1.matmul(&x).unwrap().matmul(&u2.transpose()).unwrap();
        for (a, b) in via_modes.data().iter().zip(direct.data()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_product_rejects_bad_shape() {
        let x = seq_tensor(vec![2, 3]);
        assert!(matches!(
            mode_product(&x, &DenseMatrix::identity(3), 0),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            mode_product(&x, &DenseMatrix::identity(2), 2),
            Err(Error::InvalidMode { .. })
        ));
    }

    #[test]
    fn unfold_declared_column_order() {
        // X[i1,i2,i3] = i1 + 2(i2-1) + 4(i3-1) (1-based) is exactly 1..8 in our layout
        let x = seq_tensor(vec![2, 2, 2]);
        let m = unfold(&x, 0).unwrap();
        assert_eq!(m.row(0), vec![1.0, 3.0, 5.0, 7.0]);
        assert_eq!(m.row(1), vec![2.0, 4.0, 6.0, 8.0]);
        let back = fold(&m, 0, &[2, 2, 2]).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn unfold_middle_mode_enumerates_fibers() {
        let x = seq_tensor(vec![2, 2, 2]);
        let m = unfold(&x, 1).unwrap();
        // columns: (i1, i3) with i1 fastest
        assert_eq!(m.row(0), vec![1.0, 2.0, 5.0, 6.0]);
        assert_eq!(m.row(1), vec![3.0, 4.0, 7.0, 8.0]);
    }

    #[test]
    fn unfold_one_mode_tensor_is_column() {
        let x = seq_tensor(vec![4]);
        let m = unfold(&x, 0).unwrap();
        assert_eq!((m.rows(), m.cols()), (4, 1));
        assert_eq!(m.data(), x.data());
    }

    #[test]
    fn fold_round_trip_and_errors() {
        let x = lcg_tensor(vec![3, 4, 2], 5);
        for mode in 0..3 {
            assert_eq!(
                fold(&unfold(&x, mode).unwrap(), mode, &[3, 4, 2]).unwrap(),
                x
            );
        }
        let bad = DenseMatrix::zeros(2, 3);
        assert!(fold(&bad, 0, &[2, 2, 2]).is_err());
        assert!(fold(&bad, 5, &[2, 3]).is_err());
    }

    #[test]
    fn kronecker_small_cases() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let k = kronecker(&DenseMatrix::identity(2), &b);
        let expect = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0, 0.0],
            vec![3.0, 4.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 2.0],
            vec![0.0, 0.0, 3.0, 4.0],
        ])
        .unwrap();
        assert_eq!(k, expect);
        let two = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        assert_eq!(kronecker(&two, &b), b.scaled(2.0));
    }

    #[test]
    fn kronecker_unfolding_identity() {
        let x = lcg_tensor(vec![3, 3, 3], 77);
        let us: Vec<DenseMatrix> = (0..3)
            .map(|i| lcg_matrix(2 + i, 3, 100 + i as u64))
            .collect();
        let y = multi_mode_product(&x, &us).unwrap();
        for mode in 0..3 {
            let others: Vec<&DenseMatrix> = (0..3)
                .rev()
                .filter(|&j| j != mode)
                .map(|j| &us[j])
                .collect();
            let kr = kronecker_chain(&others).unwrap();
            let rhs = us[mode]
                .matmul(&unfold(&x, mode).unwrap())
                .unwrap()
                .matmul(&kr.transpose())
                .unwrap();
            let lhs = unfold(&y, mode).unwrap();
            let err = lhs.sub(&rhs).unwrap().frobenius_norm() / lhs.frobenius_norm();
            assert!(err < 1e-12, "mode {mode}: {err}");
        }
    }

    #[test]
    fn outer_products() {
        let u = [1.0, 2.0];
        let v = [3.0, -1.0, 0.5];
        let t = outer(&[&u, &v]).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.get(&[i, j]), u[i] * v[j]);
            }
        }
        let e = |n: usize, k: usize| -> Vec<f64> {
            (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()
        };
        let (a, b, c) = (e(3, 0), e(3, 1), e(3, 2));
        let t = outer(&[&a, &b, &c]).unwrap();
        assert_eq!(count_nonzeros(&t, 0.0), 1);
        assert_eq!(t.get(&[0, 1, 2]), 1.0);
        assert!(outer(&[]).is_err());
    }

    #[test]
    fn outer_norm_is_product_of_norms() {
        let u = lcg_tensor(vec![4], 1).into_data();
        let v = lcg_tensor(vec![3], 2).into_data();
        let w = lcg_tensor(vec![5], 3).into_data();
        let t = outer(&[&u, &v, &w]).unwrap();
        let expect = l2_norm(&u) * l2_norm(&v) * l2_norm(&w);
        assert!((t.frobenius_norm() - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn norms() {
        assert_eq!(l2_norm(&[3.0, 4.0]), 5.0);
        assert_eq!(l1_norm(&[1.0, -2.0, 3.0]), 6.0);
        assert_eq!(l2_norm(&[]), 0.0);
        let t = DenseTensor::new(vec![3], vec![0.0, 1e-10, 2.0]).unwrap();
        assert_eq!(count_nonzeros(&t, ZERO_TOL), 1);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(DenseTensor::zeros(vec![]).is_err());
        assert!(DenseTensor::zeros(vec![2, 0]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![1.0; 3]).is_err());
    }
}
