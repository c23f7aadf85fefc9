//! Matrix and tensor decompositions: one-sided Jacobi SVD, Householder QR,
//! best rank-k approximation, and the unfold-then-SVD rank-one decomposition
//! that the parallel recovery consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    add_outer_into, axpy, dot, l2_norm, mode_product, unfold, DenseMatrix, DenseTensor,
};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = sum_i s_i u_i v_i^T` keeping only the positive singular values.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Nonincreasing, all strictly positive.
    pub singular_values: Vec<f64>,
    /// `rows x r`, orthonormal columns.
    pub left_vectors: DenseMatrix,
    /// `cols x r`, orthonormal columns.
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn u(&self, i: usize) -> &[f64] {
        self.left_vectors.column(i)
    }

    pub fn v(&self, i: usize) -> &[f64] {
        self.right_vectors.column(i)
    }

    /// `sum_{i<k} s_i u_i v_i^T`.
    pub fn reconstruct(&self, k: usize) -> DenseMatrix {
        let (m, n) = (self.left_vectors.rows(), self.right_vectors.rows());
        let mut out = DenseMatrix::zeros(m, n);
        for i in 0..k.min(self.rank()) {
            let (u, v, s) = (self.u(i), self.v(i), self.singular_values[i]);
            for (c, &vc) in v.iter().enumerate() {
                axpy(s * vc, u, out.column_mut(c));
            }
        }
        out
    }
}

/// Hestenes one-sided Jacobi on the columns of `a`. Returns the rotated
/// columns `W = A V` (mutually orthogonal) and the accumulated orthogonal `V`.
fn hestenes(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = a.cols();
    let mut w = a.clone();
    let mut v = DenseMatrix::identity(n);
    let tol = f64::EPSILON * (a.rows().max(1) as f64).sqrt();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (w.column(p), w.column(q));
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

fn rotate_columns(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    let data = m.data_mut();
    let (lo, hi) = data.split_at_mut(q * rows);
    let cp = &mut lo[p * rows..(p + 1) * rows];
    let cq = &mut hi[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Singular value decomposition by one-sided Jacobi rotations.
///
/// Singular values below `max(rows, cols) * eps * s_1` are treated as zero
/// and dropped, so `rank()` is the numerical rank at working precision.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let (m, n) = (a.rows(), a.cols());
    // rotate the shorter side
    let transposed = n > m;
    let work = if transposed { a.transpose() } else { a.clone() };
    let (w, v) = hestenes(&work);
    let mut triples: Vec<(f64, usize)> = (0..w.cols()).map(|j| (l2_norm(w.column(j)), j)).collect();
    triples.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let s1 = triples.first().map_or(0.0, |t| t.0);
    let cutoff = (m.max(n) as f64) * f64::EPSILON * s1;
    let kept: Vec<(f64, usize)> = triples
        .into_iter()
        .filter(|&(s, _)| s > cutoff && s > 0.0)
        .collect();

    let mut sing = Vec::with_capacity(kept.len());
    let mut left_cols = Vec::with_capacity(kept.len());
    let mut right_cols = Vec::with_capacity(kept.len());
    for &(s, j) in &kept {
        sing.push(s);
        let wj: Vec<f64> = w.column(j).iter().map(|x| x / s).collect();
        let vj = v.column(j).to_vec();
        if transposed {
            left_cols.push(vj);
            right_cols.push(wj);
        } else {
            left_cols.push(wj);
            right_cols.push(vj);
        }
    }
    Ok(SvdResult {
        singular_values: sing,
        left_vectors: DenseMatrix::from_columns(m, &left_cols)?,
        right_vectors: DenseMatrix::from_columns(n, &right_cols)?,
    })
}

/// Orthonormal basis (as columns) of the null space of `a`: right singular
/// directions whose singular value is at most `rel_tol * s_1`.
pub fn null_space(a: &DenseMatrix, rel_tol: f64) -> Result<DenseMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let (w, v) = hestenes(a);
    let norms: Vec<f64> = (0..w.cols()).map(|j| l2_norm(w.column(j))).collect();
    let s1 = norms.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<Vec<f64>> = norms
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * s1 || s1 == 0.0)
        .map(|(j, _)| v.column(j).to_vec())
        .collect();
    DenseMatrix::from_columns(a.cols(), &cols)
}

/// Best rank-`k` approximation `A_k = sum_{i<=k} s_i u_i v_i^T`.
pub fn best_rank_k(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if k < 1 {
        return Err(Error::arg("best_rank_k needs k >= 1"));
    }
    let s = svd(a)?;
    if k >= s.rank() {
        return Ok(a.clone());
    }
    Ok(s.reconstruct(k))
}

/// Number of singular values strictly above `threshold`.
pub fn numerical_rank(a: &DenseMatrix, threshold: f64) -> Result<usize> {
    if threshold < 0.0 {
        return Err(Error::arg("threshold must be nonnegative"));
    }
    Ok(svd(a)?
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count())
}

/// A sum of `K` rank-one terms `sum_i a_i^(1) ∘ .. ∘ a_i^(d)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakDecomposition {
    pub dims: Vec<usize>,
    /// `terms[i][j]` is the mode-`j` factor of term `i`.
    pub terms: Vec<Vec<Vec<f64>>>,
}

impl WeakDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sums the terms in index order.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mut acc = DenseTensor::zeros(self.dims.clone())?;
        for term in &self.terms {
            let refs: Vec<&[f64]> = term.iter().map(Vec::as_slice).collect();
            add_outer_into(&mut acc, 1.0, &refs)?;
        }
        Ok(acc)
    }
}

/// Kept singular indices under the cutoff `max(rank_tol, 1e-10 * s_1)`,
/// optionally capped at `max_rank` leading values.
fn kept_ranks(s: &SvdResult, rank_tol: f64, max_rank: Option<usize>) -> usize {
    let s1 = s.singular_values.first().copied().unwrap_or(0.0);
    let cut = rank_tol.max(1e-10 * s1);
    let n = s.singular_values.iter().take_while(|&&v| v > cut).count();
    max_rank.map_or(n, |c| n.min(c))
}

/// Splits `Y` into `b_i^(1) (b_i^(2))^T` with `b^(1) = sqrt(s) u`, `b^(2) = sqrt(s) v`.
pub fn rank_decompose_matrix(y: &DenseMatrix) -> Result<WeakDecomposition> {
    weak_tucker_decompose(&y.to_tensor(), 0.0)
}

/// Rank-one decomposition by successive unfolding: SVD the mode-1
/// unfolding, keep `sqrt(s) u` as the first factor, reshape `sqrt(s) v` into a
/// tensor over the remaining modes and recurse.
///
/// Singular values at or below `max(rank_tol, 1e-10 * s_1)` of each
/// unfolding are dropped.
pub fn weak_tucker_decompose(y: &DenseTensor, rank_tol: f64) -> Result<WeakDecomposition> {
    weak_tucker_decompose_capped(y, rank_tol, None)
}

/// [`weak_tucker_decompose`] keeping at most `max_rank` singular pairs per
/// unfolding.
pub fn weak_tucker_decompose_capped(
    y: &DenseTensor,
    rank_tol: f64,
    max_rank: Option<usize>,
) -> Result<WeakDecomposition> {
    if y.order() < 2 {
        return Err(Error::arg("weak decomposition needs at least two modes"));
    }
    if rank_tol < 0.0 {
        return Err(Error::arg("rank_tol must be nonnegative"));
    }
    let mut terms = Vec::new();
    split_recursive(y, rank_tol, max_rank, &mut Vec::new(), &mut terms)?;
    Ok(WeakDecomposition {
        dims: y.dims().to_vec(),
        terms,
    })
}

fn split_recursive(
    t: &DenseTensor,
    rank_tol: f64,
    max_rank: Option<usize>,
    prefix: &mut Vec<Vec<f64>>,
    out: &mut Vec<Vec<Vec<f64>>>,
) -> Result<()> {
    if t.order() == 1 {
        let mut term = prefix.clone();
        term.push(t.data().to_vec());
        out.push(term);
        return Ok(());
    }
    let m = unfold(t, 0)?;
    let s = svd(&m)?;
    let rest = t.dims()[1..].to_vec();
    for i in 0..kept_ranks(&s, rank_tol, max_rank) {
        let root = s.singular_values[i].sqrt();
        prefix.push(s.u(i).iter().map(|x| x * root).collect());
        let g = DenseTensor::new(rest.clone(), s.v(i).iter().map(|x| x * root).collect())?;
        split_recursive(&g, rank_tol, max_rank, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}

/// Moore–Penrose pseudo-inverse through the SVD.
pub fn pinv(a: &DenseMatrix) -> Result<DenseMatrix> {
    let s = svd(a)?;
    let mut out = DenseMatrix::zeros(a.cols(), a.rows());
    for i in 0..s.rank() {
        let inv = 1.0 / s.singular_values[i];
        let (u, v) = (s.u(i), s.v(i));
        for (c, &uc) in u.iter().enumerate() {
            axpy(inv * uc, v, out.column_mut(c));
        }
    }
    Ok(out)
}

/// Coefficients `xi` with `X = sum xi_{i1..id} c_{i1,1} ∘ .. ∘ c_{id,d}`, where
/// the columns of `bases[j]` span the mode-`j` column space of `X`.
pub fn core_tucker_coefficients(x: &DenseTensor, bases: &[DenseMatrix]) -> Result<DenseTensor> {
    if bases.len() != x.order() {
        return Err(Error::dims(format!(
            "{} bases for a tensor of order {}",
            bases.len(),
            x.order()
        )));
    }
    let mut xi = x.clone();
    for (j, b) in bases.iter().enumerate() {
        if b.rows() != x.dims()[j] {
            return Err(Error::dims(format!(
                "basis {j} has {} rows, mode has {}",
                b.rows(),
                x.dims()[j]
            )));
        }
        xi = mode_product(&xi, &pinv(b)?, j)?;
    }
    let mut back = xi.clone();
    for (j, b) in bases.iter().enumerate() {
        back = mode_product(&back, b, j)?;
    }
    let err = back.sub(x)?.frobenius_norm();
    if err > 1e-8 * x.frobenius_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::arg(format!(
            "bases do not span the tensor (residual {err:.3e})"
        )));
    }
    Ok(xi)
}

/// Householder QR of a tall matrix (`rows >= cols`).
#[derive(Clone, Debug)]
pub struct Qr {
    /// Householder vectors below the diagonal, R on and above it.
    packed: DenseMatrix,
    betas: Vec<f64>,
}

impl Qr {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(Error::dims(format!("QR needs rows >= cols, got {m}x{n}")));
        }
        let mut p = a.clone();
        let mut betas = vec![0.0; n];
        for k in 0..n {
            let col = &p.column(k)[k..];
            let norm = l2_norm(col);
            if norm == 0.0 {
                continue;
            }
            let alpha = if col[0] > 0.0 { -norm } else { norm };
            let mut v = col.to_vec();
            v[0] -= alpha;
            let vnorm2 = dot(&v, &v);
            if vnorm2 == 0.0 {
                continue;
            }
            let beta = 2.0 / vnorm2;
            for j in k + 1..n {
                let cj = &mut p.column_mut(j)[k..];
                let f = beta * dot(&v, cj);
                axpy(-f, &v, cj);
            }
            // store R_kk and the reflector scaled so that v[0] = 1
            let v0 = v[0];
            let ck = &mut p.column_mut(k)[k..];
            ck[0] = alpha;
            for (dst, &vi) in ck[1..].iter_mut().zip(&v[1..]) {
                *dst = vi / v0;
            }
            betas[k] = beta * v0 * v0;
        }
        Ok(Self { packed: p, betas })
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.packed.get(i, j)
    }

    /// True when every `|R_jj|` exceeds `rel_tol * max |R_ii|`.
    pub fn full_rank(&self, rel_tol: f64) -> bool {
        let n = self.packed.cols();
        let diag: Vec<f64> = (0..n).map(|i| self.r(i, i).abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        dmax > 0.0 && diag.iter().all(|&d| d > rel_tol * dmax)
    }

    /// Applies `Q^T` to `b` in place.
    fn apply_qt(&self, b: &mut [f64]) {
        let n = self.packed.cols();
        for k in 0..n {
            if self.betas[k] == 0.0 {
                continue;
            }
            let tail = &self.packed.column(k)[k + 1..];
            let mut f = b[k] + dot(tail, &b[k + 1..]);
            f *= self.betas[k];
            b[k] -= f;
            axpy(-f, tail, &mut b[k + 1..]);
        }
    }

    /// Solves `R x = c` (upper triangular).
    fn back_substitute(&self, c: &[f64]) -> Vec<f64> {
        let n = self.packed.cols();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = c[i];
            for j in i + 1..n {
                s -= self.r(i, j) * x[j];
            }
            x[i] = s / self.r(i, i);
        }
        x
    }

    /// Solves `R^T w = s` (lower triangular).
    fn forward_substitute_rt(&self, s: &[f64]) -> Vec<f64> {
        let n = self.packed.cols();
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = s[i];
            for j in 0..i {
                acc -= self.r(j, i) * w[j];
            }
            w[i] = acc / self.r(i, i);
        }
        w
    }

    /// Least-squares solution of `A x ≈ b` and the residual norm `||A x - b||`.
    pub fn least_squares(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let n = self.packed.cols();
        let mut qb = b.to_vec();
        self.apply_qt(&mut qb);
        let x = self.back_substitute(&qb[..n]);
        (x, l2_norm(&qb[n..]))
    }

    /// `(A^T A)^{-1} s = R^{-1} R^{-T} s`.
    pub fn solve_gram(&self, s: &[f64]) -> Vec<f64> {
        let w = self.forward_substitute_rt(s);
        self.back_substitute(&w)
    }
}

/// Distance from `y` to the column space of `a`.
pub fn range_distance(a: &DenseMatrix, y: &[f64]) -> Result<f64> {
    // an orthonormal basis of range(A) from the SVD of A
    let s = svd(a)?;
    let mut r = y.to_vec();
    for i in 0..s.rank() {
        let u = s.u(i);
        let c = dot(u, &r);
        axpy(-c, u, &mut r);
    }
    Ok(l2_norm(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::outer;

    fn lcg_matrix(rows: usize, cols: usize, mut state: u64) -> DenseMatrix {
        let data = (0..rows * cols)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        DenseMatrix::from_col_major(rows, cols, data).unwrap()
    }

    fn check_svd(a: &DenseMatrix) {
        let s = svd(a).unwrap();
        let r = s.rank();
        for i in 0..r {
            for j in 0..r {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(s.u(i), s.u(j)) - e).abs() < 1e-12);
                assert!((dot(s.v(i), s.v(j)) - e).abs() < 1e-12);
            }
            let av = a.matvec(s.v(i)).unwrap();
            let atu = a.matvec_t(s.u(i)).unwrap();
            for (x, y) in av.iter().zip(s.u(i)) {
                assert!((x - s.singular_values[i] * y).abs() < 1e-12);
            }
            for (x, y) in atu.iter().zip(s.v(i)) {
                assert!((x - s.singular_values[i] * y).abs() < 1e-12);
            }
        }
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let err = s.reconstruct(r).sub(a).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn svd_diag_three_zero() {
        let s = svd(&DenseMatrix::from_diag(&[3.0, 0.0])).unwrap();
        assert_eq!(s.singular_values, vec![3.0]);
        assert!((s.u(0)[0].abs() - 1.0).abs() < 1e-15 && s.u(0)[1] == 0.0);
        assert!((s.v(0)[0].abs() - 1.0).abs() < 1e-15 && s.v(0)[1] == 0.0);
    }

    #[test]
    fn svd_random_wide_and_tall() {
        check_svd(&lcg_matrix(5, 7, 1));
        check_svd(&lcg_matrix(7, 5, 2));
        check_svd(&lcg_matrix(1, 6, 3));
    }

    #[test]
    fn svd_rejects_nan() {
        let mut a = DenseMatrix::zeros(2, 2);
        a.set(0, 1, f64::NAN);
        assert!(matches!(svd(&a), Err(Error::NonFinite)));
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let a = lcg_matrix(5, 7, 9);
        let mut x = vec![1.0; 7];
        for _ in 0..2000 {
            let z = a.matvec_t(&a.matvec(&x).unwrap()).unwrap();
            let nz = l2_norm(&z);
            x = z.iter().map(|v| v / nz).collect();
        }
        let est = l2_norm(&a.matvec(&x).unwrap());
        let s1 = svd(&a).unwrap().singular_values[0];
        assert!((est - s1).abs() <= 1e-8 * s1, "{est} vs {s1}");
    }

    #[test]
    fn frobenius_norm_equals_singular_value_energy() {
        let a = lcg_matrix(4, 3, 21);
        let s = svd(&a).unwrap();
        let energy: f64 = s.singular_values.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((energy - a.frobenius_norm()).abs() < 1e-13);
    }

    #[test]
    fn best_rank_k_cases() {
        let a = DenseMatrix::from_diag(&[3.0, 1.0]);
        assert_eq!(
            best_rank_k(&a, 1).unwrap(),
            DenseMatrix::from_diag(&[3.0, 0.0])
        );
        assert_eq!(best_rank_k(&a, 2).unwrap(), a);
        assert_eq!(best_rank_k(&a, 5).unwrap(), a);
        assert!(best_rank_k(&a, 0).is_err());

        let b = lcg_matrix(6, 6, 5);
        let s = svd(&b).unwrap();
        for k in 1..6 {
            let bk = best_rank_k(&b, k).unwrap();
            let diff = b.sub(&bk).unwrap();
            let tail: f64 = s.singular_values[k..]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            assert!((diff.frobenius_norm() - tail).abs() < 1e-12);
            let spec = svd(&diff).unwrap().singular_values[0];
            assert!((spec - s.singular_values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn numerical_rank_cases() {
        assert_eq!(
            numerical_rank(&DenseMatrix::from_diag(&[3.0, 1.0, 0.01]), 0.5).unwrap(),
            2
        );
        assert_eq!(numerical_rank(&lcg_matrix(4, 6, 8), 0.0).unwrap(), 4);
        assert_eq!(numerical_rank(&DenseMatrix::zeros(3, 3), 1e-3).unwrap(), 0);
        assert!(numerical_rank(&DenseMatrix::zeros(1, 1), -1.0).is_err());
    }

    #[test]
    fn rank_decompose_matrix_cases() {
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 0.0, 4.0, 1.0];
        let y = outer(&[&u, &v]).unwrap().to_matrix().unwrap();
        let d = rank_decompose_matrix(&y).unwrap();
        assert_eq!(d.len(), 1);
        assert!(rank_decompose_matrix(&DenseMatrix::zeros(3, 3))
            .unwrap()
            .is_empty());

        let a = lcg_matrix(5, 2, 31).matmul(&lcg_matrix(2, 6, 32)).unwrap();
        let d = rank_decompose_matrix(&a).unwrap();
        assert_eq!(d.len(), 2);
        let back = d.reconstruct().unwrap().to_matrix().unwrap();
        assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn weak_tucker_rank_one_and_zero() {
        let (u, v, w) = ([1.0, 2.0, 0.0], [0.0, -1.0], [3.0, 1.0, 1.0, 0.5]);
        let x = outer(&[&u, &v, &w]).unwrap();
        let d = weak_tucker_decompose(&x, 0.0).unwrap();
        assert_eq!(d.len(), 1);
        for (f, orig) in d.terms[0].iter().zip([&u[..], &v[..], &w[..]]) {
            // parallel: |<f, orig>| = |f| |orig|
            let c = dot(f, orig).abs();
            assert!((c - l2_norm(f) * l2_norm(orig)).abs() < 1e-12 * c);
        }
        let z = DenseTensor::zeros(vec![3, 3, 3]).unwrap();
        assert!(weak_tucker_decompose(&z, 0.0).unwrap().is_empty());
        assert!(weak_tucker_decompose(&DenseTensor::zeros(vec![3]).unwrap(), 0.0).is_err());
    }

    #[test]
    fn weak_tucker_two_terms() {
        let f = |s: u64| lcg_matrix(4, 1, s).into_data();
        let (a1, a2, a3, b1, b2, b3) = (f(1), f(2), f(3), f(4), f(5), f(6));
        let x = outer(&[&a1, &a2, &a3])
            .unwrap()
            .add(&outer(&[&b1, &b2, &b3]).unwrap())
            .unwrap();
        let d = weak_tucker_decompose(&x, 0.0).unwrap();
        assert!(d.len() <= 4);
        let err = d.reconstruct().unwrap().sub(&x).unwrap().frobenius_norm();
        assert!(err <= 1e-8 * x.frobenius_norm());
    }

    #[test]
    fn core_tucker_cases() {
        let x = DenseTensor::new(vec![2, 2, 2], (0..8).map(|v| v as f64 - 3.0).collect()).unwrap();
        let eye: Vec<DenseMatrix> = (0..3).map(|_| DenseMatrix::identity(2)).collect();
        assert_eq!(core_tucker_coefficients(&x, &eye).unwrap(), x);

        let (u, v, w) = (vec![1.0, 2.0], vec![0.5, 0.0, 1.0], vec![3.0, -1.0]);
        let r1 = outer(&[&u, &v, &w]).unwrap();
        let bases = vec![
            DenseMatrix::from_columns(2, &[u.clone()]).unwrap(),
            DenseMatrix::from_columns(3, &[v.clone()]).unwrap(),
            DenseMatrix::from_columns(2, &[w.clone()]).unwrap(),
        ];
        let xi = core_tucker_coefficients(&r1, &bases).unwrap();
        assert_eq!(xi.dims(), &[1, 1, 1]);
        assert!((xi.data()[0] - 1.0).abs() < 1e-12);

        let bad = vec![
            DenseMatrix::from_columns(2, &[vec![1.0, 0.0]]).unwrap(),
            DenseMatrix::identity(2),
            DenseMatrix::identity(2),
        ];
        assert!(core_tucker_coefficients(&x, &bad).is_err());
    }

    #[test]
    fn qr_least_squares_and_gram() {
        let a = lcg_matrix(7, 3, 44);
        let x_true = [1.0, -2.0, 0.25];
        let b = a.matvec(&x_true).unwrap();
        let qr = Qr::new(&a).unwrap();
        assert!(qr.full_rank(1e-12));
        let (x, res) = qr.least_squares(&b);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-12);
        }
        assert!(res < 1e-12);
        let s = [1.0, -1.0, 1.0];
        let g = a.transpose().matmul(&a).unwrap();
        let z = qr.solve_gram(&s);
        let back = g.matvec(&z).unwrap();
        for (p, q) in back.iter().zip(&s) {
            assert!((p - q).abs() < 1e-10);
        }
        assert!(Qr::new(&lcg_matrix(2, 3, 1)).is_err());
    }

    #[test]
    fn null_space_is_annihilated() {
        let a = lcg_matrix(3, 6, 17);
        let ns = null_space(&a, 1e-10).unwrap();
        assert_eq!(ns.cols(), 3);
        for j in 0..3 {
            assert!(l2_norm(&a.matvec(ns.column(j)).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn range_distance_of_in_range_vector_is_zero() {
        let a = lcg_matrix(6, 2, 3);
        let y = a.matvec(&[1.0, 2.0]).unwrap();
        assert!(range_distance(&a, &y).unwrap() < 1e-12);
        let e = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(range_distance(&a, &e).unwrap() > 0.1);
    }
}
