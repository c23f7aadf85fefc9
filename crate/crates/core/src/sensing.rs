//! Measurement ensembles, the mode-wise sampling operator, observation noise,
//! measurement-count planning and the small-scale null space property check.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decomp::null_space;
use crate::error::{Error, Result};
use crate::io::{read_dtf1, write_dtf1};
use crate::rng::{Stream, NOISE_STREAM, SIGNAL_STREAM};
use crate::tensor::{kronecker_chain, l1_norm, multi_mode_product, DenseMatrix, DenseTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// i.i.d. `N(0, 1/m)` entries.
    Gaussian,
    /// i.i.d. `±1/sqrt(m)` entries.
    Bernoulli,
    /// Square identity matrices (no compression).
    Identity,
    /// Matrices supplied by the caller.
    Custom,
}

/// One measurement matrix `U_i` (`m_i x N_i`) per tensor mode.
#[derive(Clone, Debug)]
pub struct MeasurementEnsemble {
    pub matrices: Vec<DenseMatrix>,
    pub distribution: Distribution,
    pub seed: u64,
}

impl MeasurementEnsemble {
    pub fn identity(dims: &[usize]) -> Self {
        Self {
            matrices: dims.iter().map(|&n| DenseMatrix::identity(n)).collect(),
            distribution: Distribution::Identity,
            seed: 0,
        }
    }

    pub fn from_matrices(matrices: Vec<DenseMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::arg("an ensemble needs at least one matrix"));
        }
        Ok(Self {
            matrices,
            distribution: Distribution::Custom,
            seed: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    /// `(N_1, .., N_d)`.
    pub fn signal_dims(&self) -> Vec<usize> {
        self.matrices.iter().map(DenseMatrix::cols).collect()
    }

    /// `(m_1, .., m_d)`.
    pub fn measurement_dims(&self) -> Vec<usize> {
        self.matrices.iter().map(DenseMatrix::rows).collect()
    }

    /// Nominal entry standard deviation of each matrix.
    pub fn scale(&self) -> Vec<f64> {
        self.matrices
            .iter()
            .map(|u| match self.distribution {
                Distribution::Gaussian | Distribution::Bernoulli => (1.0 / u.rows() as f64).sqrt(),
                _ => f64::NAN,
            })
            .collect()
    }

    /// Explicit vectorized operator `U_d ⊗ .. ⊗ U_1`, so that
    /// `vec(sample(X)) = A vec(X)` in the crate's linearization.
    pub fn kronecker_operator(&self) -> Result<DenseMatrix> {
        let rev: Vec<&DenseMatrix> = self.matrices.iter().rev().collect();
        kronecker_chain(&rev)
    }

    /// Bytes needed to hold [`Self::kronecker_operator`].
    pub fn kronecker_bytes(&self) -> u64 {
        let m: u64 = self.measurement_dims().iter().map(|&v| v as u64).product();
        let n: u64 = self.signal_dims().iter().map(|&v| v as u64).product();
        8 * m * n
    }

    /// Writes the matrices as DTF1 files next to a JSON sidecar at `path`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("ensemble")
            .to_string();
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut files = Vec::new();
        for (i, u) in self.matrices.iter().enumerate() {
            let name = format!("{stem}.u{}.dtf1", i + 1);
            write_dtf1(dir.join(&name), &u.to_tensor())?;
            files.push(name);
        }
        let meta = EnsembleMeta {
            distribution: self.distribution,
            seed: self.seed,
            dims: self.signal_dims(),
            m: self.measurement_dims(),
            files,
        };
        fs::write(path, serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta: EnsembleMeta = serde_json::from_str(&fs::read_to_string(path)?)?;
        let dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if meta.files.len() != meta.dims.len() || meta.m.len() != meta.dims.len() {
            return Err(Error::Format(
                "ensemble sidecar lists inconsistent mode counts".into(),
            ));
        }
        let mut matrices = Vec::with_capacity(meta.files.len());
        for (i, f) in meta.files.iter().enumerate() {
            let u = read_dtf1(dir.join(f))?
                .to_matrix()
                .map_err(|e| Error::Format(e.to_string()))?;
            if u.rows() != meta.m[i] || u.cols() != meta.dims[i] {
                return Err(Error::Format(format!(
                    "matrix {f} does not match sidecar shape"
                )));
            }
            matrices.push(u);
        }
        Ok(Self {
            matrices,
            distribution: meta.distribution,
            seed: meta.seed,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleMeta {
    distribution: Distribution,
    seed: u64,
    dims: Vec<usize>,
    m: Vec<usize>,
    files: Vec<String>,
}

/// Draws one `m_i x N_i` matrix per mode. Matrix `i` uses RNG stream `i`;
/// entries are drawn column by column (row index fastest).
pub fn generate_ensemble(
    dims: &[usize],
    per_mode_m: &[usize],
    distribution: Distribution,
    seed: u64,
) -> Result<MeasurementEnsemble> {
    if dims.len() != per_mode_m.len() || dims.is_empty() {
        return Err(Error::dims(format!(
            "{} dims vs {} measurement counts",
            dims.len(),
            per_mode_m.len()
        )));
    }
    let mut matrices = Vec::with_capacity(dims.len());
    for (i, (&n, &m)) in dims.iter().zip(per_mode_m).enumerate() {
        if m < 1 || m > n {
            return Err(Error::arg(format!("mode {i}: m = {m} outside 1..={n}")));
        }
        let mut s = Stream::new(seed, i as u64);
        let scale = (1.0 / m as f64).sqrt();
        let data: Vec<f64> = match distribution {
            Distribution::Gaussian => (0..m * n).map(|_| scale * s.gaussian()).collect(),
            Distribution::Bernoulli => (0..m * n).map(|_| scale * s.sign()).collect(),
            Distribution::Identity => {
                if m != n {
                    return Err(Error::arg("identity ensembles need m = N"));
                }
                DenseMatrix::identity(n).into_data()
            }
            Distribution::Custom => return Err(Error::arg("custom ensembles cannot be generated")),
        };
        matrices.push(DenseMatrix::from_col_major(m, n, data)?);
    }
    Ok(MeasurementEnsemble {
        matrices,
        distribution,
        seed,
    })
}

/// `Y = X ×_1 U_1 ×_2 .. ×_d U_d`.
pub fn sample(x: &DenseTensor, ensemble: &MeasurementEnsemble) -> Result<DenseTensor> {
    if x.dims() != ensemble.signal_dims().as_slice() {
        return Err(Error::dims(format!(
            "signal dims {:?} do not match ensemble {:?}",
            x.dims(),
            ensemble.signal_dims()
        )));
    }
    multi_mode_product(x, &ensemble.matrices)
}

/// Adds i.i.d. `N(0, std^2)` noise drawn from `NOISE_STREAM` of `seed`.
/// Returns the noisy tensor and the Frobenius norm of the added noise.
pub fn add_noise(y: &DenseTensor, std: f64, seed: u64) -> Result<(DenseTensor, f64)> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::arg("noise std must be finite and nonnegative"));
    }
    if std == 0.0 {
        return Ok((y.clone(), 0.0));
    }
    let mut s = Stream::new(seed, NOISE_STREAM);
    let noise: Vec<f64> = (0..y.len()).map(|_| std * s.gaussian()).collect();
    let eps = crate::tensor::l2_norm(&noise);
    let data = y.data().iter().zip(&noise).map(|(a, b)| a + b).collect();
    Ok((DenseTensor::new(y.dims().to_vec(), data)?, eps))
}

/// A `k`-sparse tensor: `k` distinct positions drawn uniformly, standard
/// normal values, all from `SIGNAL_STREAM` of `seed`.
pub fn random_sparse(dims: &[usize], k: usize, seed: u64) -> Result<DenseTensor> {
    let mut x = DenseTensor::zeros(dims.to_vec())?;
    if k > x.len() {
        return Err(Error::arg(format!("k = {k} exceeds {} entries", x.len())));
    }
    let mut s = Stream::new(seed, SIGNAL_STREAM);
    for idx in s.choose(x.len(), k) {
        x.data_mut()[idx] = s.gaussian();
    }
    Ok(x)
}

/// Measurement counts from the sparsity bounds `m_i >= 2ck ln(N_i/k)`
/// (per mode) and `m >= 2ck(-ln k + sum ln N_i)` (vectorized Kronecker).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeasurementPlan {
    pub k: usize,
    pub c: f64,
    pub dims: Vec<usize>,
    pub per_mode_m: Vec<usize>,
    /// Modes where the bound exceeded `N_i` and `m_i` was clamped to `N_i`.
    pub clamped: Vec<bool>,
    pub total_m_gtcs: u64,
    pub total_m_kcs: u64,
    /// True when the mode-wise scheme needs more measurements in total.
    pub gtcs_ratio_worse: bool,
}

pub fn plan_measurements(dims: &[usize], k: usize, c: f64) -> Result<MeasurementPlan> {
    if k < 1 {
        return Err(Error::arg("k must be at least 1"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::arg("c must be positive"));
    }
    if dims.is_empty() {
        return Err(Error::arg("no dimensions given"));
    }
    let kf = k as f64;
    let mut per_mode_m = Vec::with_capacity(dims.len());
    let mut clamped = Vec::with_capacity(dims.len());
    for (i, &n) in dims.iter().enumerate() {
        if n <= k {
            return Err(Error::arg(format!(
                "mode {i}: N = {n} <= k = {k}, the bound is undefined"
            )));
        }
        let raw = (2.0 * c * kf * (n as f64 / kf).ln()).ceil().max(1.0) as usize;
        clamped.push(raw > n);
        per_mode_m.push(raw.min(n));
    }
    let total_m_gtcs = per_mode_m.iter().map(|&m| m as u64).product();
    let log_sum: f64 = dims.iter().map(|&n| (n as f64).ln()).sum();
    let total_m_kcs = (2.0 * c * kf * (log_sum - kf.ln())).ceil().max(1.0) as u64;
    Ok(MeasurementPlan {
        k,
        c,
        dims: dims.to_vec(),
        per_mode_m,
        clamped,
        total_m_gtcs,
        total_m_kcs,
        gtcs_ratio_worse: total_m_gtcs > total_m_kcs,
    })
}

/// Largest column count [`check_nsp_exhaustive`] accepts.
pub const NSP_MAX_COLUMNS: usize = 14;

/// Decides the null space property of order `k` exactly.
///
/// NSP_k fails iff some null-space vector `w` with `||w||_1 = 1` puts at least
/// half of its mass on `k` coordinates. The top-k mass is convex in `w`, so its
/// maximum over the polytope `{w in null(A) : ||w||_1 <= 1}` is attained at a
/// vertex. With an `r`-dimensional null space every vertex has `r - 1`
/// independent zero coordinates, so enumerating all `(r-1)`-subsets of zero
/// coordinates visits every vertex.
pub fn check_nsp_exhaustive(a: &DenseMatrix, k: usize) -> Result<bool> {
    let n = a.cols();
    if n > NSP_MAX_COLUMNS {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive NSP check is limited to {NSP_MAX_COLUMNS} columns, got {n}"
        )));
    }
    let basis = null_space(a, 1e-10)?;
    let r = basis.cols();
    if r == 0 || k == 0 {
        return Ok(true);
    }
    let k = k.min(n);
    let mut subset: Vec<usize> = (0..r - 1).collect();
    loop {
        if let Some(w) = vertex_for_zero_set(&basis, &subset)? {
            let mut mags: Vec<f64> = w.iter().map(|x| x.abs()).collect();
            mags.sort_by(|x, y| y.total_cmp(x));
            let top: f64 = mags[..k].iter().sum();
            if top >= 0.5 - 1e-10 {
                return Ok(false);
            }
        }
        if !next_combination(&mut subset, n) {
            break;
        }
    }
    Ok(true)
}

/// Null-space vector vanishing on `zeros`, normalized to unit l1 norm, if that
/// direction is unique.
fn vertex_for_zero_set(basis: &DenseMatrix, zeros: &[usize]) -> Result<Option<Vec<f64>>> {
    let r = basis.cols();
    let coeff = if zeros.is_empty() {
        vec![1.0]
    } else {
        let mut sub = DenseMatrix::zeros(zeros.len(), r);
        for (row, &z) in zeros.iter().enumerate() {
            for c in 0..r {
                sub.set(row, c, basis.get(z, c));
            }
        }
        let ns = null_space(&sub, 1e-9)?;
        if ns.cols() != 1 {
            return Ok(None);
        }
        ns.column(0).to_vec()
    };
    let w = basis.matvec(&coeff)?;
    let norm = l1_norm(&w);
    if norm == 0.0 {
        return Ok(None);
    }
    Ok(Some(w.into_iter().map(|v| v / norm).collect()))
}

/// Advances `c` (strictly increasing, values `< n`) to the next combination.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kronecker;

    fn rand_tensor(dims: Vec<usize>, seed: u64) -> DenseTensor {
        let mut s = Stream::new(seed, 99);
        let n = dims.iter().product();
        DenseTensor::new(dims, (0..n).map(|_| s.gaussian()).collect()).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_ensemble(&[10, 12], &[4, 5], Distribution::Gaussian, 42).unwrap();
        let b = generate_ensemble(&[10, 12], &[4, 5], Distribution::Gaussian, 42).unwrap();
        for (x, y) in a.matrices.iter().zip(&b.matrices) {
            assert_eq!(x.data(), y.data());
        }
        let c = generate_ensemble(&[10, 12], &[4, 5], Distribution::Gaussian, 43).unwrap();
        assert_ne!(a.matrices[0].data(), c.matrices[0].data());
    }

    #[test]
    fn gaussian_column_variance() {
        // 1000x10 sample: each column's variance estimate has relative sd
        // sqrt(2/999) ~ 4.5%, so a 20% band is beyond 4 sigma
        let m = 1000;
        let e = generate_ensemble(&[m], &[m], Distribution::Gaussian, 5).unwrap();
        let u = &e.matrices[0];
        assert_eq!((u.rows(), u.cols()), (1000, 1000));
        for c in 0..10 {
            let col = u.column(c);
            let mean = col.iter().sum::<f64>() / m as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            let target = 1.0 / m as f64;
            assert!((var - target).abs() < 0.2 * target, "column {c}: {var}");
        }
    }

    #[test]
    fn bernoulli_entries() {
        let e = generate_ensemble(&[9], &[4], Distribution::Bernoulli, 1).unwrap();
        for &v in e.matrices[0].data() {
            assert!(v == 0.5 || v == -0.5);
        }
    }

    #[test]
    fn generation_rejects_bad_m() {
        assert!(generate_ensemble(&[5], &[6], Distribution::Gaussian, 0).is_err());
        assert!(generate_ensemble(&[5], &[0], Distribution::Gaussian, 0).is_err());
        assert!(generate_ensemble(&[5, 5], &[3], Distribution::Gaussian, 0).is_err());
    }

    #[test]
    fn identity_sampling_is_noop() {
        let x = rand_tensor(vec![3, 4, 2], 1);
        let y = sample(&x, &MeasurementEnsemble::identity(&[3, 4, 2])).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn matrix_sampling_matches_dense_product() {
        let x = rand_tensor(vec![4, 5], 2);
        let e = generate_ensemble(&[4, 5], &[3, 2], Distribution::Gaussian, 9).unwrap();
        let y = sample(&x, &e).unwrap().to_matrix().unwrap();
        let xm = x.to_matrix().unwrap();
        let direct = e.matrices[0]
            .matmul(&xm)
            .unwrap()
            .matmul(&e.matrices[1].transpose())
            .unwrap();
        assert!(y.sub(&direct).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn vectorized_sampling_matches_kronecker_chain() {
        let x = rand_tensor(vec![3, 3, 3], 3);
        let e = generate_ensemble(&[3, 3, 3], &[2, 3, 2], Distribution::Gaussian, 4).unwrap();
        let y = sample(&x, &e).unwrap();
        // chain built independently of kronecker_operator
        let a = kronecker(&kronecker(&e.matrices[2], &e.matrices[1]), &e.matrices[0]);
        let vy = a.matvec(x.data()).unwrap();
        for (p, q) in vy.iter().zip(y.data()) {
            assert!((p - q).abs() < 1e-13);
        }
        assert_eq!(e.kronecker_operator().unwrap(), a);
        assert_eq!(e.kronecker_bytes(), 8 * 12 * 27);
    }

    #[test]
    fn sampling_rejects_mismatch() {
        let x = rand_tensor(vec![3, 4], 3);
        assert!(sample(&x, &MeasurementEnsemble::identity(&[4, 3])).is_err());
    }

    #[test]
    fn zero_noise_is_noop() {
        let y = rand_tensor(vec![3, 3], 4);
        let (z, eps) = add_noise(&y, 0.0, 1).unwrap();
        assert_eq!((z, eps), (y, 0.0));
    }

    #[test]
    fn epsilon_is_norm_of_injected_noise() {
        let y = rand_tensor(vec![4, 4], 5);
        let (z, eps) = add_noise(&y, 0.3, 11).unwrap();
        let diff = z.sub(&y).unwrap();
        assert!((diff.frobenius_norm() - eps).abs() < 1e-12);
        assert!(add_noise(&y, -1.0, 0).is_err());
    }

    #[test]
    fn noise_norm_concentrates() {
        // ||E||_F / std is chi with n = 64 dof: mean ~ sqrt(n - 1/2), sd ~ 1/sqrt(2)
        let y = DenseTensor::zeros(vec![4, 4, 4]).unwrap();
        let n = 64.0f64;
        let mut sum = 0.0;
        for seed in 0..100 {
            let (_, eps) = add_noise(&y, 2.0, seed).unwrap();
            let chi = eps / 2.0;
            assert!((chi - n.sqrt()).abs() < 3.0 * 0.75, "seed {seed}: {chi}");
            sum += chi;
        }
        let mean = sum / 100.0;
        // 3 sigma band for the mean of 100 draws
        assert!((mean - (n - 0.5).sqrt()).abs() < 3.0 * 0.7072 / 10.0);
    }

    #[test]
    fn plan_examples() {
        let p = plan_measurements(&[16], 2, 1.0).unwrap();
        assert_eq!(p.per_mode_m, vec![9]);
        let p = plan_measurements(&[16, 16], 2, 1.0).unwrap();
        assert_eq!(p.total_m_gtcs, 81);
        assert_eq!(p.total_m_kcs, 20);
        assert!(p.gtcs_ratio_worse);
        assert!(plan_measurements(&[16, 2], 2, 1.0).is_err());
        assert!(plan_measurements(&[16], 0, 1.0).is_err());
        assert!(plan_measurements(&[16], 2, 0.0).is_err());
    }

    #[test]
    fn plan_clamps_to_n() {
        let p = plan_measurements(&[8], 3, 2.0).unwrap();
        // 12 ln(8/3) = 11.77 -> 12 > 8
        assert_eq!(p.per_mode_m, vec![8]);
        assert_eq!(p.clamped, vec![true]);
    }

    #[test]
    fn plan_monotone_where_increasing() {
        for n in [20usize, 40, 100] {
            let mut last = 0;
            for k in 1..=((n as f64 / std::f64::consts::E).floor() as usize) {
                let m = plan_measurements(&[n], k, 1.0).unwrap().per_mode_m[0];
                assert!(m >= last);
                last = m;
            }
        }
        for k in [1usize, 3] {
            let mut last = 0;
            for n in (k * 3)..60 {
                let m = plan_measurements(&[n], k, 1.0).unwrap().per_mode_m[0];
                assert!(m >= last);
                last = m;
            }
        }
    }

    #[test]
    fn nsp_zero_column_fails() {
        let a =
            DenseMatrix::from_rows(&[vec![1.0, 2.0, 0.0, 1.0], vec![0.5, -1.0, 0.0, 2.0]]).unwrap();
        assert!(!check_nsp_exhaustive(&a, 1).unwrap());
    }

    #[test]
    fn nsp_invertible_is_vacuous() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!(check_nsp_exhaustive(&a, 2).unwrap());
    }

    #[test]
    fn nsp_refuses_large() {
        let a = DenseMatrix::zeros(3, 15);
        assert!(matches!(
            check_nsp_exhaustive(&a, 1),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn nsp_matches_sampled_null_space() {
        // 6x8 gaussian, 2-dimensional null space: sweep directions densely
        for seed in 0..6 {
            let a = generate_ensemble(&[8], &[6], Distribution::Gaussian, seed)
                .unwrap()
                .matrices
                .remove(0);
            let exact = check_nsp_exhaustive(&a, 1).unwrap();
            let ns = null_space(&a, 1e-10).unwrap();
            assert_eq!(ns.cols(), 2);
            let mut worst: f64 = 0.0;
            let mut s = Stream::new(seed, 1234);
            for _ in 0..100_000 {
                let c = [s.gaussian(), s.gaussian()];
                let w = ns.matvec(&c).unwrap();
                let l1 = l1_norm(&w);
                let top = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                worst = worst.max(top / l1);
            }
            // sampling only under-estimates the maximum
            if worst >= 0.5 {
                assert!(!exact, "seed {seed}");
            }
            if exact {
                assert!(worst < 0.5);
            } else {
                assert!(worst > 0.5 - 1e-3, "seed {seed}: sampled {worst}");
            }
        }
    }

    #[test]
    fn ensemble_save_load() {
        let dir = tempfile::tempdir().unwrap();
        let e = generate_ensemble(&[5, 6], &[3, 4], Distribution::Bernoulli, 77).unwrap();
        let p = dir.path().join("ens.json");
        e.save(&p).unwrap();
        let back = MeasurementEnsemble::load(&p).unwrap();
        assert_eq!(back.distribution, Distribution::Bernoulli);
        assert_eq!(back.seed, 77);
        assert_eq!(back.matrices, e.matrices);
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(meta["dims"], serde_json::json!([5, 6]));
        assert_eq!(meta["m"], serde_json::json!([3, 4]));
    }

    #[test]
    fn sampling_is_linear() {
        let e = generate_ensemble(&[3, 4], &[2, 3], Distribution::Gaussian, 1).unwrap();
        let (x1, x2) = (rand_tensor(vec![3, 4], 1), rand_tensor(vec![3, 4], 2));
        let combo = x1.scaled(0.7).add(&x2.scaled(-1.3)).unwrap();
        let lhs = sample(&combo, &e).unwrap();
        let rhs = sample(&x1, &e)
            .unwrap()
            .scaled(0.7)
            .add(&sample(&x2, &e).unwrap().scaled(-1.3))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().frobenius_norm() <= 1e-12 * lhs.frobenius_norm());
    }
}
