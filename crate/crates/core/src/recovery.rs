//! Recovery of a sparse signal from mode-wise measurements.
//!
//! * Serial methods (`csm_s`, `gtcs_s`) undo one mode at a time: unfold the
//!   current tensor in mode `i`, solve one l1 problem per column against
//!   `U_i`, fold back with `m_i` replaced by `N_i`.
//! * Parallel methods (`csm_p`, `gtcs_p`) split `Y` into rank-one terms,
//!   recover every factor independently and sum the outer products in term
//!   order.
//! * `kcs_recover` solves a single problem against the explicit Kronecker
//!   operator.
//!
//! Independent subproblems run on the rayon pool; results are gathered in
//! index order, so the output does not depend on scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{numerical_rank, svd, weak_tucker_decompose, weak_tucker_decompose_capped};
use crate::error::{Error, Result};
use crate::l1::{c2_constant, L1Solver, SolverSettings};
use crate::sensing::MeasurementEnsemble;
use crate::tensor::{add_outer_into, fold, unfold, DenseMatrix, DenseTensor};

/// Default ceiling for the explicit Kronecker operator.
pub const DEFAULT_MEMORY_BUDGET: u64 = 512 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CsmS,
    CsmP,
    GtcsS,
    GtcsP,
    Kcs,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::CsmS,
        Method::CsmP,
        Method::GtcsS,
        Method::GtcsP,
        Method::Kcs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::CsmS => "csm_s",
            Method::CsmP => "csm_p",
            Method::GtcsS => "gtcs_s",
            Method::GtcsP => "gtcs_p",
            Method::Kcs => "kcs",
        }
    }

    /// Matrix-only methods.
    pub fn requires_matrix(self) -> bool {
        matches!(self, Method::CsmS | Method::CsmP)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown method '{s}' (expected csm_s, csm_p, gtcs_s, gtcs_p or kcs)"
                ))
            })
    }
}

/// Per-factor tolerance of noisy parallel tensor recovery.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisyTolerance {
    /// `eps / sqrt(2k)` for matrices, `eps / (2k)` for higher orders.
    #[default]
    ByOrder,
    SqrtTwoK,
    TwoK,
}

impl NoisyTolerance {
    fn per_factor(self, epsilon: f64, k: usize, order: usize) -> f64 {
        let k = k as f64;
        match self {
            NoisyTolerance::ByOrder if order == 2 => epsilon / (2.0 * k).sqrt(),
            NoisyTolerance::ByOrder => epsilon / (2.0 * k),
            NoisyTolerance::SqrtTwoK => epsilon / (2.0 * k).sqrt(),
            NoisyTolerance::TwoK => epsilon / (2.0 * k),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    pub y: DenseTensor,
    pub ensemble: MeasurementEnsemble,
    /// Sparsity budget of the signal.
    pub k: usize,
    /// Optional sparsity of the mode-`j` fibers; overrides `k` per mode.
    pub per_mode_k: Option<Vec<usize>>,
    /// Bound on the Frobenius norm of the observation noise.
    pub epsilon: f64,
    /// Restricted isometry constant used only for the reported error bound.
    pub delta_2k: Option<f64>,
    pub settings: SolverSettings,
    /// Noiseless serial recovery: relax stages after the first to a small
    /// residual ball instead of exact equality.
    pub relax_stages: bool,
    pub tolerance: NoisyTolerance,
    /// Byte ceiling for the Kronecker operator.
    pub memory_budget: u64,
}

impl RecoveryProblem {
    pub fn new(y: DenseTensor, ensemble: MeasurementEnsemble, k: usize) -> Result<Self> {
        let p = Self {
            y,
            ensemble,
            k,
            per_mode_k: None,
            epsilon: 0.0,
            delta_2k: None,
            settings: SolverSettings::default(),
            relax_stages: false,
            tolerance: NoisyTolerance::default(),
            memory_budget: DEFAULT_MEMORY_BUDGET,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.y.order()
    }

    pub fn validate(&self) -> Result<()> {
        let mdims = self.ensemble.measurement_dims();
        if self.y.dims() != mdims.as_slice() {
            return Err(Error::Contract(format!(
                "observation dims {:?} do not match ensemble output dims {mdims:?}",
                self.y.dims()
            )));
        }
        if self.k == 0 {
            return Err(Error::arg("sparsity budget k must be at least 1"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::arg("epsilon must be finite and nonnegative"));
        }
        if let Some(ks) = &self.per_mode_k {
            if ks.len() != self.order() || ks.contains(&0) {
                return Err(Error::Contract(format!(
                    "per-mode sparsity needs {} positive entries, got {ks:?}",
                    self.order()
                )));
            }
        }
        if let Some(d) = self.delta_2k {
            c2_constant(d)?;
        }
        if !self.y.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn mode_k(&self, mode: usize) -> usize {
        self.per_mode_k.as_ref().map_or(self.k, |ks| ks[mode])
    }

    /// `C_2` for the stage schedule; `delta_2k = 0` when unspecified.
    fn c2(&self) -> f64 {
        c2_constant(self.delta_2k.unwrap_or(0.0)).expect("validated")
    }

    fn error_bound(&self) -> Option<f64> {
        self.delta_2k
            .map(|d| c2_constant(d).expect("validated").powi(self.order() as i32) * self.epsilon)
    }

    fn require_order(&self, method: &str, order: usize) -> Result<()> {
        if self.order() != order {
            return Err(Error::Contract(format!(
                "{method} needs a {order}-mode problem, got {} modes",
                self.order()
            )));
        }
        Ok(())
    }

    fn require_noise(&self, method: &str, noisy: bool) -> Result<()> {
        match (noisy, self.epsilon > 0.0) {
            (true, false) => Err(Error::Contract(format!("{method} needs epsilon > 0"))),
            (false, true) => Err(Error::Contract(format!(
                "{method} is the noiseless entry point; epsilon must be 0"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    pub label: String,
    /// Mode handled by the stage, for serial methods.
    pub mode: Option<usize>,
    pub subproblems: usize,
    /// Residual bound per subproblem (after any relaxation).
    pub tolerance: f64,
    pub max_residual: f64,
    pub max_iterations: usize,
    /// Some subproblem needed the `sqrt 2` tolerance relaxation.
    pub relaxed: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub method: Method,
    pub noisy: bool,
    #[serde(skip)]
    pub x_hat: DenseTensor,
    pub dims: Vec<usize>,
    pub stages: Vec<StageReport>,
    /// Number of rank-one terms, for parallel methods.
    pub terms: Option<usize>,
    /// The noisy decomposition kept fewer terms than the numerical rank of `Y`.
    pub truncated: bool,
    pub epsilon: f64,
    pub error_bound: Option<f64>,
    pub total_seconds: f64,
}

impl RecoveryReport {
    /// JSON rendering; wall-clock fields are dropped unless `timing` is set.
    pub fn to_json(&self, timing: bool) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if !timing {
            if let Some(obj) = v.as_object_mut() {
                obj.remove("total_seconds");
                if let Some(stages) = obj.get_mut("stages").and_then(|s| s.as_array_mut()) {
                    for s in stages {
                        if let Some(s) = s.as_object_mut() {
                            s.remove("seconds");
                        }
                    }
                }
            }
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Runs `method`, picking the noisy variant when `p.epsilon > 0`.
pub fn recover(method: Method, p: &RecoveryProblem) -> Result<RecoveryReport> {
    let noisy = p.epsilon > 0.0;
    match (method, noisy) {
        (Method::CsmS, false) => csm_s(p),
        (Method::CsmS, true) => csm_s_noisy(p),
        (Method::CsmP, false) => csm_p(p),
        (Method::CsmP, true) => csm_p_noisy(p),
        (Method::GtcsS, false) => gtcs_s(p),
        (Method::GtcsS, true) => gtcs_s_noisy(p),
        (Method::GtcsP, false) => gtcs_p(p),
        (Method::GtcsP, true) => gtcs_p_noisy(p),
        (Method::Kcs, _) => kcs_recover(p),
    }
}

pub fn csm_s(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_order("csm_s", 2)?;
    p.require_noise("csm_s", false)?;
    serial(p, Method::CsmS)
}

pub fn gtcs_s(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_noise("gtcs_s", false)?;
    serial(p, Method::GtcsS)
}

pub fn csm_s_noisy(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_order("csm_s_noisy", 2)?;
    p.require_noise("csm_s_noisy", true)?;
    serial(p, Method::CsmS)
}

pub fn gtcs_s_noisy(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_noise("gtcs_s_noisy", true)?;
    serial(p, Method::GtcsS)
}

pub fn csm_p(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_order("csm_p", 2)?;
    p.require_noise("csm_p", false)?;
    parallel(p, Method::CsmP)
}

pub fn gtcs_p(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_noise("gtcs_p", false)?;
    parallel(p, Method::GtcsP)
}

pub fn gtcs_p_noisy(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_noise("gtcs_p_noisy", true)?;
    parallel(p, Method::GtcsP)
}

/// Noisy matrix recovery from the leading singular triplets of `Y`:
/// `X = sum_i (1/s_i) x_i y_i^T` with `U_1 x_i ~ s_i u_i`, `U_2 y_i ~ s_i v_i`.
pub fn csm_p_noisy(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    p.require_order("csm_p_noisy", 2)?;
    p.require_noise("csm_p_noisy", true)?;
    let start = Instant::now();
    let y = p.y.to_matrix()?;
    let s = svd(&y)?;
    let k = p.k as f64;
    let floor = p.epsilon / k.sqrt();
    let above = s.singular_values.iter().filter(|&&v| v > floor).count();
    let kept = p.k.min(above);
    let rank = s.rank();
    let tol = p.epsilon / (2.0 * k).sqrt();

    let u = &p.ensemble.matrices;
    let mut left = Vec::with_capacity(kept);
    let mut right = Vec::with_capacity(kept);
    for i in 0..kept {
        let sigma = s.singular_values[i];
        left.push(s.u(i).iter().map(|v| v * sigma).collect::<Vec<f64>>());
        right.push(s.v(i).iter().map(|v| v * sigma).collect::<Vec<f64>>());
    }
    let t = Instant::now();
    let xs = solve_batch(&u[0], &left, tol, true, &p.settings, "factors mode 0")?;
    let ys = solve_batch(&u[1], &right, tol, true, &p.settings, "factors mode 1")?;
    let seconds = t.elapsed().as_secs_f64();

    let dims = p.ensemble.signal_dims();
    let mut x_hat = DenseTensor::zeros(dims.clone())?;
    for i in 0..kept {
        add_outer_into(
            &mut x_hat,
            1.0 / s.singular_values[i],
            &[&xs.out[i], &ys.out[i]],
        )?;
    }
    let stage = StageReport {
        label: "factors".into(),
        mode: None,
        subproblems: 2 * kept,
        tolerance: if xs.relaxed || ys.relaxed {
            tol * std::f64::consts::SQRT_2
        } else {
            tol
        },
        max_residual: xs.max_residual.max(ys.max_residual),
        max_iterations: xs.max_iterations.max(ys.max_iterations),
        relaxed: xs.relaxed || ys.relaxed,
        seconds,
    };
    Ok(RecoveryReport {
        method: Method::CsmP,
        noisy: true,
        x_hat,
        dims,
        stages: vec![stage],
        terms: Some(kept),
        truncated: kept < rank,
        epsilon: p.epsilon,
        error_bound: p.error_bound(),
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Vectorized recovery against `U_d ⊗ .. ⊗ U_1`; refuses when the explicit
/// operator exceeds `p.memory_budget`.
pub fn kcs_recover(p: &RecoveryProblem) -> Result<RecoveryReport> {
    p.validate()?;
    let required = p.ensemble.kronecker_bytes();
    if required > p.memory_budget {
        return Err(Error::MemoryBudget {
            required,
            budget: p.memory_budget,
        });
    }
    let start = Instant::now();
    let a = p.ensemble.kronecker_operator()?;
    let rhs = vec![p.y.data().to_vec()];
    let batch = solve_batch(
        &a,
        &rhs,
        p.epsilon,
        p.epsilon > 0.0,
        &p.settings,
        "kronecker",
    )?;
    let dims = p.ensemble.signal_dims();
    let x_hat = DenseTensor::new(
        dims.clone(),
        batch.out.into_iter().next().expect("one solve"),
    )?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(RecoveryReport {
        method: Method::Kcs,
        noisy: p.epsilon > 0.0,
        x_hat,
        dims,
        stages: vec![StageReport {
            label: "kronecker".into(),
            mode: None,
            subproblems: 1,
            tolerance: if batch.relaxed {
                p.epsilon * std::f64::consts::SQRT_2
            } else {
                p.epsilon
            },
            max_residual: batch.max_residual,
            max_iterations: batch.max_iterations,
            relaxed: batch.relaxed,
            seconds,
        }],
        terms: None,
        truncated: false,
        epsilon: p.epsilon,
        error_bound: None,
        total_seconds: seconds,
    })
}

/// Whether `rank(U_1 X U_2^T) == rank(X)`, each rank counted above
/// `1e-8` of its own largest singular value.
pub fn verify_rank_preservation(x: &DenseMatrix, ensemble: &MeasurementEnsemble) -> Result<bool> {
    if ensemble.order() != 2 {
        return Err(Error::Contract(
            "rank preservation is defined for two-mode ensembles".into(),
        ));
    }
    let u = &ensemble.matrices;
    let y = u[0].matmul(x)?.matmul(&u[1].transpose())?;
    Ok(relative_rank(x)? == relative_rank(&y)?)
}

fn relative_rank(a: &DenseMatrix) -> Result<usize> {
    let s = svd(a)?;
    let s1 = s.singular_values.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return Ok(0);
    }
    numerical_rank(a, 1e-8 * s1)
}

fn serial(p: &RecoveryProblem, method: Method) -> Result<RecoveryReport> {
    let start = Instant::now();
    let noisy = p.epsilon > 0.0;
    let c2 = p.c2();
    let signal_dims = p.ensemble.signal_dims();
    let mut current = p.y.clone();
    let mut stages = Vec::with_capacity(p.order());
    for (mode, u) in p.ensemble.matrices.iter().enumerate() {
        let t = Instant::now();
        let unf = unfold(&current, mode)?;
        let cols = unf.cols();
        let tol = if noisy {
            c2.powi(mode as i32) * p.epsilon / (cols as f64).sqrt()
        } else if p.relax_stages && mode > 0 {
            10.0 * p.settings.tol_primal * current.frobenius_norm()
        } else {
            0.0
        };
        let rhs: Vec<Vec<f64>> = (0..cols).map(|c| unf.column(c).to_vec()).collect();
        let label = format!("mode {mode}");
        let batch = solve_batch(u, &rhs, tol, noisy, &p.settings, &label)?;
        let z = DenseMatrix::from_columns(u.cols(), &batch.out)?;
        let mut dims = current.dims().to_vec();
        dims[mode] = signal_dims[mode];
        current = fold(&z, mode, &dims)?;
        stages.push(StageReport {
            label,
            mode: Some(mode),
            subproblems: cols,
            tolerance: if batch.relaxed {
                tol * std::f64::consts::SQRT_2
            } else {
                tol
            },
            max_residual: batch.max_residual,
            max_iterations: batch.max_iterations,
            relaxed: batch.relaxed,
            seconds: t.elapsed().as_secs_f64(),
        });
    }
    Ok(RecoveryReport {
        method,
        noisy,
        x_hat: current,
        dims: signal_dims,
        stages,
        terms: None,
        truncated: false,
        epsilon: p.epsilon,
        error_bound: if noisy { p.error_bound() } else { None },
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

fn parallel(p: &RecoveryProblem, method: Method) -> Result<RecoveryReport> {
    let start = Instant::now();
    let noisy = p.epsilon > 0.0;
    let d = p.order();
    let dec = if noisy {
        let kmax = (0..d).map(|j| p.mode_k(j)).max().unwrap_or(p.k);
        weak_tucker_decompose_capped(&p.y, p.epsilon / (p.k as f64).sqrt(), Some(kmax))?
    } else {
        weak_tucker_decompose(&p.y, 0.0)?
    };
    let terms = dec.len();
    let truncated = noisy && {
        let top = unfold(&p.y, 0)?;
        let s = svd(&top)?;
        let above = s
            .singular_values
            .iter()
            .filter(|&&v| v > p.epsilon / (p.k as f64).sqrt())
            .count()
            .min(p.mode_k(0));
        above < s.rank()
    };

    let tolerances: Vec<f64> = (0..d)
        .map(|j| {
            if noisy {
                p.tolerance.per_factor(p.epsilon, p.mode_k(j), d)
            } else {
                0.0
            }
        })
        .collect();
    let t = Instant::now();
    // one batch per mode; each batch spreads its K solves over the pool
    let mut factors: Vec<Batch> = Vec::with_capacity(d);
    for (j, u) in p.ensemble.matrices.iter().enumerate() {
        let rhs: Vec<Vec<f64>> = dec.terms.iter().map(|term| term[j].clone()).collect();
        factors.push(solve_batch(
            u,
            &rhs,
            tolerances[j],
            noisy,
            &p.settings,
            &format!("factors mode {j}"),
        )?);
    }
    let seconds = t.elapsed().as_secs_f64();

    let dims = p.ensemble.signal_dims();
    let mut x_hat = DenseTensor::zeros(dims.clone())?;
    for i in 0..terms {
        let refs: Vec<&[f64]> = factors.iter().map(|b| b.out[i].as_slice()).collect();
        add_outer_into(&mut x_hat, 1.0, &refs)?;
    }
    let relaxed = factors.iter().any(|b| b.relaxed);
    let stage = StageReport {
        label: "factors".into(),
        mode: None,
        subproblems: terms * d,
        tolerance: tolerances.iter().copied().fold(0.0, f64::max)
            * if relaxed {
                std::f64::consts::SQRT_2
            } else {
                1.0
            },
        max_residual: factors.iter().map(|b| b.max_residual).fold(0.0, f64::max),
        max_iterations: factors.iter().map(|b| b.max_iterations).max().unwrap_or(0),
        relaxed,
        seconds,
    };
    Ok(RecoveryReport {
        method,
        noisy,
        x_hat,
        dims,
        stages: vec![stage],
        terms: Some(terms),
        truncated,
        epsilon: p.epsilon,
        error_bound: if noisy { p.error_bound() } else { None },
        total_seconds: start.elapsed().as_secs_f64(),
    })
}

struct Batch {
    out: Vec<Vec<f64>>,
    max_residual: f64,
    max_iterations: usize,
    relaxed: bool,
}

/// Solves `min ||z||_1 s.t. ||U z - b|| <= tol` for every right-hand side.
/// With `allow_relax`, an infeasible subproblem is retried once at
/// `sqrt(2) * tol`.
fn solve_batch(
    u: &DenseMatrix,
    rhs: &[Vec<f64>],
    tol: f64,
    allow_relax: bool,
    settings: &SolverSettings,
    label: &str,
) -> Result<Batch> {
    let solver = L1Solver::new(u, *settings)?;
    let results: Vec<Result<(Vec<f64>, f64, usize, bool)>> = rhs
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let attempt = |eps: f64| -> Result<(Vec<f64>, f64, usize)> {
                let sol = solver.solve(b, eps)?;
                if !sol.converged {
                    return Err(Error::SolverFailure {
                        stage: label.to_string(),
                        detail: format!(
                            "subproblem {i} did not converge in {} iterations (residual {:.3e}, gap {:.3e})",
                            sol.iterations, sol.residual, sol.gap
                        ),
                    });
                }
                Ok((sol.z, sol.residual, sol.iterations))
            };
            match attempt(tol) {
                Ok((z, r, it)) => Ok((z, r, it, false)),
                Err(Error::Infeasible { .. }) if allow_relax && tol > 0.0 => {
                    attempt(tol * std::f64::consts::SQRT_2).map(|(z, r, it)| (z, r, it, true))
                }
                Err(Error::Infeasible { distance, epsilon }) => Err(Error::SolverFailure {
                    stage: label.to_string(),
                    detail: format!("subproblem {i} infeasible: distance {distance:.3e} > tolerance {epsilon:.3e}"),
                }),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut batch = Batch {
        out: Vec::with_capacity(rhs.len()),
        max_residual: 0.0,
        max_iterations: 0,
        relaxed: false,
    };
    for r in results {
        let (z, res, it, relaxed) = r?;
        batch.out.push(z);
        batch.max_residual = batch.max_residual.max(res);
        batch.max_iterations = batch.max_iterations.max(it);
        batch.relaxed |= relaxed;
    }
    Ok(batch)
}

/// Relative Frobenius error `||a - b|| / ||b||` (absolute when `b = 0`).
pub fn relative_error(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let diff = a.sub(b)?;
    let nb = b.frobenius_norm();
    let nd = diff.frobenius_norm();
    Ok(if nb == 0.0 { nd } else { nd / nb })
}
