//! DCT sparsification, PSNR, and the measurement sweep harness.
//!
//! A sweep builds one target signal (a file or a synthetic smooth image or
//! video, reduced to a low-frequency DCT box), then for every grid point
//! and trial draws a Gaussian ensemble, senses the DCT coefficient tensor,
//! optionally adds noise, and runs each configured method. PSNR is taken in
//! the signal domain after the inverse transform.
//!
//! Per-trial seeds are `derive_seed(cfg.seed, TRIAL_TAG, trial)`; the same
//! trial seed drives the ensemble (streams `0..d`) and the noise, so every
//! method at a grid point sees identical data. Within a trial the ensembles
//! for different grid points are nested (see [`nested_ensemble`]).

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::{recover, relative_error, Method, RecoveryProblem, DEFAULT_MEMORY_BUDGET};
use crate::rng::{derive_seed, Stream, SIGNAL_STREAM};
use crate::sensing::{
    add_noise, generate_ensemble, plan_measurements, sample, Distribution, MeasurementEnsemble,
    MeasurementPlan,
};
use crate::tensor::{multi_mode_product, DenseMatrix, DenseTensor};

/// PSNR reported for an exact reconstruction.
pub const PSNR_CAP_DB: f64 = 300.0;

pub const TRIAL_TAG: u64 = 0x7472_6961_6c00;

pub const CSV_HEADER: &str =
    "method,normalized_m,noise_std,trial,seed,psnr_db,rel_fro_error,recovery_seconds,status";

/// Orthonormal DCT-II matrix: `C[k][n] = a_k cos(pi (2n + 1) k / 2N)`.
pub fn dct_matrix(n: usize) -> DenseMatrix {
    let mut c = DenseMatrix::zeros(n, n);
    let nf = n as f64;
    for k in 0..n {
        let a = if k == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        for j in 0..n {
            c.set(
                k,
                j,
                a * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos(),
            );
        }
    }
    c
}

/// Separable DCT-II along every mode.
pub fn dct_forward(x: &DenseTensor) -> Result<DenseTensor> {
    let mats: Vec<DenseMatrix> = x.dims().iter().map(|&n| dct_matrix(n)).collect();
    multi_mode_product(x, &mats)
}

pub fn dct_inverse(c: &DenseTensor) -> Result<DenseTensor> {
    let mats: Vec<DenseMatrix> = c
        .dims()
        .iter()
        .map(|&n| dct_matrix(n).transpose())
        .collect();
    multi_mode_product(c, &mats)
}

fn check_box(dims: &[usize], keep: &[usize]) -> Result<()> {
    if keep.len() != dims.len() {
        return Err(Error::dims(format!(
            "keep box {keep:?} for a {}-mode signal",
            dims.len()
        )));
    }
    if keep.iter().zip(dims).any(|(&k, &n)| k == 0 || k > n) {
        return Err(Error::arg(format!(
            "keep box {keep:?} outside dims {dims:?}"
        )));
    }
    Ok(())
}

/// Zeroes every coefficient outside the low-frequency box `keep`, in place.
fn zero_outside(c: &mut DenseTensor, keep: &[usize]) {
    let dims = c.dims().to_vec();
    let mut idx = vec![0usize; dims.len()];
    for v in c.data_mut() {
        if idx.iter().zip(keep).any(|(i, k)| i >= k) {
            *v = 0.0;
        }
        for (i, n) in idx.iter_mut().zip(&dims) {
            *i += 1;
            if *i < *n {
                break;
            }
            *i = 0;
        }
    }
}

/// Keeps only the DCT coefficients inside `keep` (anchored at the DC term).
pub fn dct_sparsify(x: &DenseTensor, keep: &[usize]) -> Result<DenseTensor> {
    check_box(x.dims(), keep)?;
    let mut c = dct_forward(x)?;
    zero_outside(&mut c, keep);
    dct_inverse(&c)
}

/// `10 log10(peak^2 / MSE)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(reference: &DenseTensor, candidate: &DenseTensor, peak: f64) -> Result<f64> {
    if reference.dims() != candidate.dims() {
        return Err(Error::dims(format!(
            "{:?} vs {:?}",
            reference.dims(),
            candidate.dims()
        )));
    }
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::arg("peak must be positive"));
    }
    let n = reference.len().max(1) as f64;
    let mse = reference
        .data()
        .iter()
        .zip(candidate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP_DB))
}

/// A smooth 8-bit-range test signal of any order: a few Gaussian bumps on a
/// ramp, rescaled to `0..=255` and rounded. Drawn from `SIGNAL_STREAM`.
pub fn synthetic_signal(dims: &[usize], seed: u64) -> Result<DenseTensor> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::arg(format!("bad synthetic dims {dims:?}")));
    }
    let mut s = Stream::new(seed, SIGNAL_STREAM);
    let slope: Vec<f64> = dims.iter().map(|_| s.gaussian()).collect();
    let bumps: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..5)
        .map(|_| {
            let center = dims.iter().map(|&n| s.uniform() * n as f64).collect();
            let width = dims
                .iter()
                .map(|&n| n as f64 * (0.125 + 0.2 * s.uniform()))
                .collect();
            (center, width, 2.0 * s.gaussian())
        })
        .collect();
    let raw = DenseTensor::from_fn(dims.to_vec(), |idx| {
        let mut v = 0.0;
        for ((&i, &n), g) in idx.iter().zip(dims).zip(&slope) {
            v += 0.5 * g * i as f64 / n as f64;
        }
        for (center, width, amp) in &bumps {
            let mut r2 = 0.0;
            for ((&i, c), w) in idx.iter().zip(center).zip(width) {
                let t = (i as f64 - c) / w;
                r2 += t * t;
            }
            v += amp * (-0.5 * r2).exp();
        }
        v
    })?;
    let (lo, hi) = raw
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let data = raw
        .data()
        .iter()
        .map(|v| (255.0 * (v - lo) / span).round())
        .collect();
    DenseTensor::new(dims.to_vec(), data)
}

/// A sparsified signal with its coefficient tensor.
#[derive(Clone, Debug)]
pub struct Target {
    pub signal: DenseTensor,
    /// DCT coefficients; exactly zero outside the keep box.
    pub coefficients: DenseTensor,
    pub keep: Vec<usize>,
    pub peak: f64,
}

impl Target {
    pub fn new(x: &DenseTensor, keep: &[usize], peak: f64) -> Result<Self> {
        check_box(x.dims(), keep)?;
        let mut coefficients = dct_forward(x)?;
        zero_outside(&mut coefficients, keep);
        let signal = dct_inverse(&coefficients)?;
        Ok(Self {
            signal,
            coefficients,
            keep: keep.to_vec(),
            peak,
        })
    }

    /// Sparsity budget `prod(keep)`.
    pub fn k(&self) -> usize {
        self.keep.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSource {
    Synthetic,
    /// DTF1 tensor, P5 PGM image, or a directory of PGM frames.
    File {
        path: PathBuf,
    },
}

fn default_noise_grid() -> Vec<f64> {
    vec![0.0]
}
fn default_trials() -> usize {
    1
}
fn default_c() -> f64 {
    1.0
}
fn default_budget() -> u64 {
    DEFAULT_MEMORY_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal_source: SignalSource,
    /// Signal dims; required for synthetic sources, checked against files.
    #[serde(default)]
    pub dims: Vec<usize>,
    pub dct_keep: Vec<usize>,
    pub normalized_measurement_grid: Vec<f64>,
    #[serde(default = "default_noise_grid")]
    pub noise_std_grid: Vec<f64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Constant of the per-mode measurement planner, see [`ExperimentConfig::plan`].
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_budget")]
    pub memory_budget_bytes: u64,
    /// Write wall-clock seconds; when false (the default) the column holds 0
    /// and the CSV is byte-identical across runs.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.normalized_measurement_grid.is_empty() || self.noise_std_grid.is_empty() {
            return Err(Error::arg("measurement and noise grids must be nonempty"));
        }
        if let Some(v) = self
            .normalized_measurement_grid
            .iter()
            .find(|v| !(**v > 0.0 && **v <= 1.0))
        {
            return Err(Error::arg(format!(
                "normalized measurement {v} outside (0, 1]"
            )));
        }
        if self
            .noise_std_grid
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::arg(
                "noise std values must be finite and nonnegative",
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::arg("no methods selected"));
        }
        let unique: HashSet<Method> = self.methods.iter().copied().collect();
        if unique.len() != self.methods.len() {
            return Err(Error::arg("duplicate method"));
        }
        if self.trials == 0 {
            return Err(Error::arg("trials must be at least 1"));
        }
        if !(self.c > 0.0) {
            return Err(Error::arg("planner constant c must be positive"));
        }
        if self.signal_source == SignalSource::Synthetic && self.dims.is_empty() {
            return Err(Error::arg("synthetic sources need dims"));
        }
        if !self.dims.is_empty() {
            check_box(&self.dims, &self.dct_keep)?;
            self.check_methods(self.dims.len())?;
        }
        Ok(())
    }

    fn check_methods(&self, order: usize) -> Result<()> {
        if let Some(m) = self
            .methods
            .iter()
            .find(|m| m.requires_matrix() && order != 2)
        {
            return Err(Error::Contract(format!(
                "{m} needs a 2-mode signal, config has {order} modes"
            )));
        }
        Ok(())
    }

    /// Loads the source signal and its PSNR peak: 255 for PGM and synthetic
    /// sources, the largest magnitude for DTF1 tensors.
    pub fn load_signal(&self) -> Result<(DenseTensor, f64)> {
        let (x, peak) = match &self.signal_source {
            SignalSource::Synthetic => (synthetic_signal(&self.dims, self.seed)?, 255.0),
            SignalSource::File { path } => {
                let x = crate::io::read_signal(path)?;
                let is_pgm = path.is_dir() || std::fs::read(path)?.starts_with(b"P5");
                let peak = if is_pgm {
                    255.0
                } else {
                    x.data().iter().fold(0.0f64, |a, v| a.max(v.abs()))
                };
                (x, peak)
            }
        };
        if !self.dims.is_empty() && x.dims() != self.dims.as_slice() {
            return Err(Error::dims(format!(
                "source has dims {:?}, config says {:?}",
                x.dims(),
                self.dims
            )));
        }
        check_box(x.dims(), &self.dct_keep)?;
        self.check_methods(x.order())?;
        Ok((x, if peak > 0.0 { peak } else { 1.0 }))
    }

    /// Per-mode planner output for fibers as sparse as the widest keep side.
    pub fn plan(&self) -> Result<MeasurementPlan> {
        let k = self.dct_keep.iter().copied().max().unwrap_or(1);
        plan_measurements(&self.dims, k, self.c)
    }
}

/// Gaussian ensemble whose mode-`i` matrix is the first `m_i` rows of one
/// `N_i x N_i` draw, rescaled to entry variance `1/m_i`. Ensembles for
/// growing `m` under one seed are nested, so a signal that basis pursuit
/// recovers at some `m` stays recovered at every larger `m`.
pub fn nested_ensemble(dims: &[usize], m: &[usize], seed: u64) -> Result<MeasurementEnsemble> {
    if m.len() != dims.len() {
        return Err(Error::dims(format!(
            "{} dims vs {} measurement counts",
            dims.len(),
            m.len()
        )));
    }
    if let Some(i) = (0..dims.len()).find(|&i| m[i] == 0 || m[i] > dims[i]) {
        return Err(Error::arg(format!(
            "mode {i}: m = {} outside 1..={}",
            m[i], dims[i]
        )));
    }
    let full = generate_ensemble(dims, dims, Distribution::Gaussian, seed)?;
    let mut mats = Vec::with_capacity(dims.len());
    for ((u, &mi), &n) in full.matrices.iter().zip(m).zip(dims) {
        let scale = (n as f64 / mi as f64).sqrt();
        let mut rows = DenseMatrix::zeros(mi, n);
        for c in 0..n {
            for r in 0..mi {
                rows.set(r, c, scale * u.get(r, c));
            }
        }
        mats.push(rows);
    }
    let mut ens = MeasurementEnsemble::from_matrices(mats)?;
    ens.distribution = Distribution::Gaussian;
    ens.seed = seed;
    Ok(ens)
}

/// Equal per-mode counts with `prod(m) ≈ nm * prod(N)`, clamped to `1..=N_i`.
pub fn per_mode_measurements(dims: &[usize], normalized_m: f64) -> Vec<usize> {
    let total: f64 = dims.iter().map(|&n| n as f64).product();
    let m = (normalized_m * total).powf(1.0 / dims.len() as f64).round() as usize;
    dims.iter().map(|&n| m.clamp(1, n)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    RefusedMemory,
    Failed,
}

/// One CSV row; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: Method,
    pub normalized_m: f64,
    pub noise_std: f64,
    pub trial: usize,
    pub seed: u64,
    pub psnr_db: Option<f64>,
    #[serde(rename = "rel_fro_error")]
    pub relative_frobenius_error: Option<f64>,
    pub recovery_seconds: f64,
    pub status: Status,
}

/// Runs every (method, grid point, noise level, trial) job in order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<MetricRow>> {
    cfg.validate()?;
    let (x, peak) = cfg.load_signal()?;
    let target = Target::new(&x, &cfg.dct_keep, peak)?;
    run_sweep_on(cfg, &target)
}

/// [`run_sweep`] against an already built target.
pub fn run_sweep_on(cfg: &ExperimentConfig, target: &Target) -> Result<Vec<MetricRow>> {
    let dims = target.signal.dims().to_vec();
    let mut rows = Vec::new();
    for &nm in &cfg.normalized_measurement_grid {
        let m = per_mode_measurements(&dims, nm);
        for trial in 0..cfg.trials {
            let seed = derive_seed(cfg.seed, TRIAL_TAG, trial as u64);
            let ensemble = nested_ensemble(&dims, &m, seed)?;
            let clean = sample(&target.coefficients, &ensemble)?;
            for &std in &cfg.noise_std_grid {
                let (y, _) = add_noise(&clean, std, seed)?;
                // expected noise norm
                let epsilon = std * (y.len() as f64).sqrt();
                for &method in &cfg.methods {
                    let mut row = MetricRow {
                        method,
                        normalized_m: nm,
                        noise_std: std,
                        trial,
                        seed,
                        psnr_db: None,
                        relative_frobenius_error: None,
                        recovery_seconds: 0.0,
                        status: Status::Failed,
                    };
                    let mut p = RecoveryProblem::new(y.clone(), ensemble.clone(), target.k())?
                        .with_epsilon(epsilon)?;
                    p.per_mode_k = Some(target.keep.clone());
                    p.memory_budget = cfg.memory_budget_bytes;
                    match recover(method, &p) {
                        Ok(report) => {
                            let x_hat = dct_inverse(&report.x_hat)?;
                            row.psnr_db = Some(psnr(&target.signal, &x_hat, target.peak)?);
                            row.relative_frobenius_error =
                                Some(relative_error(&report.x_hat, &target.coefficients)?);
                            if cfg.record_timing {
                                row.recovery_seconds = report.total_seconds;
                            }
                            row.status = Status::Ok;
                        }
                        Err(Error::MemoryBudget { .. }) => row.status = Status::RefusedMemory,
                        Err(_) => {}
                    }
                    rows.push(row);
                }
            }
        }
    }
    let method_rank = |m: Method| {
        cfg.methods
            .iter()
            .position(|&x| x == m)
            .unwrap_or(usize::MAX)
    };
    // stable: grid, noise and trial order stay as configured
    rows.sort_by_key(|r| method_rank(r.method));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[MetricRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[MetricRow]) -> Result<String> {
    let mut buf = Vec::new();
    if rows.is_empty() {
        buf.extend_from_slice(CSV_HEADER.as_bytes());
        buf.push(b'\n');
    } else {
        write_csv(rows, &mut buf)?;
    }
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_csv(text: &str) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Aggregate of the rows at one (method, grid point, noise level).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub normalized_m: f64,
    pub noise_std: f64,
    pub trials: usize,
    /// Rows with status `ok`; the PSNR and time columns average these.
    pub ok: usize,
    pub psnr_mean: Option<f64>,
    pub psnr_min: Option<f64>,
    pub psnr_max: Option<f64>,
    pub seconds_mean: Option<f64>,
}

/// Groups rows by (method, grid point, noise level) in first-seen order.
pub fn summarize(rows: &[MetricRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::arg("nothing to summarize"));
    }
    let mut groups: Vec<(Method, f64, f64, Vec<&MetricRow>)> = Vec::new();
    for r in rows {
        let hit = groups
            .iter_mut()
            .find(|g| g.0 == r.method && g.1 == r.normalized_m && g.2 == r.noise_std);
        match hit {
            Some(g) => g.3.push(r),
            None => groups.push((r.method, r.normalized_m, r.noise_std, vec![r])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(method, normalized_m, noise_std, members)| {
            let ok: Vec<&MetricRow> = members
                .iter()
                .copied()
                .filter(|r| r.status == Status::Ok)
                .collect();
            let psnrs: Vec<f64> = ok.iter().filter_map(|r| r.psnr_db).collect();
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    None
                } else {
                    Some(v.iter().sum::<f64>() / v.len() as f64)
                }
            };
            let secs: Vec<f64> = ok.iter().map(|r| r.recovery_seconds).collect();
            SummaryRow {
                method,
                normalized_m,
                noise_std,
                trials: members.len(),
                ok: ok.len(),
                psnr_mean: mean(&psnrs),
                psnr_min: psnrs.iter().copied().reduce(f64::min),
                psnr_max: psnrs.iter().copied().reduce(f64::max),
                seconds_mean: mean(&secs),
            }
        })
        .collect())
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}
