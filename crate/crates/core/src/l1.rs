//! l1 minimization: basis pursuit (`min ||z||_1 s.t. Az = y`) and the
//! noise-constrained variant (`min ||z||_1 s.t. ||Az - y||_2 <= eps`).
//!
//! Both problems run through one primal-dual (Chambolle–Pock) iteration on
//! the saddle problem `min_z max_u <Az, u> + ||z||_1 - g*(u)`, where `g` is
//! the indicator of the ball `{w : ||w - y|| <= eps}`. Convergence is
//! certified by a duality gap: any `u` yields the lower bound
//! `<y, lambda> - eps ||lambda||` for `lambda = -u / max(1, ||A^T u||_inf)`.
//!
//! Periodically the current support is polished: least squares (or the
//! closed-form boundary solution when `eps > 0`) on the support gives a
//! candidate that is accepted only when a matching dual certificate closes
//! the gap.

use crate::decomp::{range_distance, Qr};
use crate::error::{Error, Result};
use crate::tensor::{dot, l1_norm, l2_norm, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub max_iter: usize,
    /// Relative feasibility tolerance: `||Az - y|| <= tol_primal * max(1, ||y||)`.
    pub tol_primal: f64,
    /// Relative duality-gap tolerance.
    pub tol_dual: f64,
    /// Iterations between convergence checks.
    pub check_every: usize,
    /// Try support polishing at each check.
    pub polish: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            check_every: 10,
            polish: true,
        }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.check_every == 0 {
            return Err(Error::arg("max_iter and check_every must be positive"));
        }
        if !(self.tol_primal > 0.0) || !(self.tol_dual > 0.0) {
            return Err(Error::arg("solver tolerances must be positive"));
        }
        Ok(())
    }
}

/// An l1 recovery problem; `epsilon = 0` means equality constraints.
#[derive(Clone, Debug)]
pub struct L1Problem<'a> {
    pub a: &'a DenseMatrix,
    pub y: &'a [f64],
    pub epsilon: f64,
    pub settings: SolverSettings,
}

impl L1Problem<'_> {
    pub fn solve(&self) -> Result<L1Solution> {
        L1Solver::new(self.a, self.settings)?.solve(self.y, self.epsilon)
    }
}

#[derive(Clone, Debug)]
pub struct L1Solution {
    pub z: Vec<f64>,
    /// `||z||_1`.
    pub objective: f64,
    /// `||Az - y||_2`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative duality gap at exit.
    pub gap: f64,
    /// Whether the returned point came from support polishing.
    pub polished: bool,
}

/// Reusable solver bound to one matrix; the operator norm is estimated once.
#[derive(Clone, Debug)]
pub struct L1Solver<'a> {
    a: &'a DenseMatrix,
    norm: f64,
    /// `A = I`: basis pursuit returns `y` itself, bit for bit.
    identity: bool,
    settings: SolverSettings,
}

pub fn solve_bp(a: &DenseMatrix, y: &[f64], settings: &SolverSettings) -> Result<L1Solution> {
    L1Solver::new(a, *settings)?.solve(y, 0.0)
}

pub fn solve_bpdn(
    a: &DenseMatrix,
    y: &[f64],
    epsilon: f64,
    settings: &SolverSettings,
) -> Result<L1Solution> {
    if !(epsilon > 0.0) {
        return Err(Error::arg("solve_bpdn needs epsilon > 0"));
    }
    L1Solver::new(a, *settings)?.solve(y, epsilon)
}

/// Spectral norm estimate by power iteration on `A^T A`, from a fixed start.
pub fn operator_norm(a: &DenseMatrix) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) / (n as f64)).collect();
    let mut ax = vec![0.0; a.rows()];
    let mut est = 0.0;
    for _ in 0..500 {
        let nx = l2_norm(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        a.matvec_into(&x, &mut ax);
        let next = l2_norm(&ax);
        a.matvec_t_into(&ax, &mut x);
        if (next - est).abs() <= 1e-10 * next {
            est = next;
            break;
        }
        est = next;
    }
    est
}

struct Candidate {
    z: Vec<f64>,
    residual: f64,
    objective: f64,
    /// Value of a dual-feasible point built from the support, if any.
    dual: Option<f64>,
}

impl<'a> L1Solver<'a> {
    pub fn new(a: &'a DenseMatrix, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let identity = a.rows() == a.cols()
            && (0..a.cols()).all(|c| {
                a.column(c)
                    .iter()
                    .enumerate()
                    .all(|(r, &v)| v == if r == c { 1.0 } else { 0.0 })
            });
        Ok(Self {
            a,
            norm: operator_norm(a),
            identity,
            settings,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        self.a
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn solve(&self, y: &[f64], epsilon: f64) -> Result<L1Solution> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if y.len() != m {
            return Err(Error::dims(format!(
                "y has length {}, A has {m} rows",
                y.len()
            )));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::arg("epsilon must be finite and nonnegative"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let ynorm = l2_norm(y);
        if ynorm <= epsilon {
            return Ok(L1Solution {
                z: vec![0.0; n],
                objective: 0.0,
                residual: ynorm,
                iterations: 0,
                converged: true,
                gap: 0.0,
                polished: false,
            });
        }
        if self.norm == 0.0 {
            return Err(Error::Infeasible {
                distance: ynorm,
                epsilon,
            });
        }
        if self.identity && epsilon == 0.0 {
            return Ok(L1Solution {
                z: y.to_vec(),
                objective: l1_norm(y),
                residual: 0.0,
                iterations: 0,
                converged: true,
                gap: 0.0,
                polished: false,
            });
        }
        // work with unit-norm data; scale back at the end
        let b: Vec<f64> = y.iter().map(|v| v / ynorm).collect();
        let e = epsilon / ynorm;
        // relative to ||y||: stricter than the `max(1, ||y||)` contract and scale-free
        let feas_tol = if epsilon > 0.0 {
            e * 1e-6
        } else {
            self.settings.tol_primal
        };
        let sol = self.iterate(&b, e, feas_tol);
        let mut out = L1Solution {
            z: sol.0.iter().map(|v| v * ynorm).collect(),
            objective: 0.0,
            residual: 0.0,
            iterations: sol.1,
            converged: sol.2,
            gap: sol.3,
            polished: sol.4,
        };
        out.objective = l1_norm(&out.z);
        let mut r = vec![0.0; m];
        self.a.matvec_into(&out.z, &mut r);
        r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= yi);
        out.residual = l2_norm(&r);
        if !out.converged {
            let dist = range_distance(self.a, y)?;
            if dist > epsilon + self.settings.tol_primal * ynorm.max(1.0) {
                return Err(Error::Infeasible {
                    distance: dist,
                    epsilon,
                });
            }
        }
        Ok(out)
    }

    /// Runs the primal-dual loop on normalized data. Returns
    /// `(z, iterations, converged, relative gap, polished)`.
    ///
    /// The loop restarts from the better of the current and the averaged
    /// iterate whenever the KKT error has dropped enough since the last
    /// restart, and rebalances the primal weight at each restart.
    fn iterate(&self, b: &[f64], e: f64, feas_tol: f64) -> (Vec<f64>, usize, bool, f64, bool) {
        let a = self.a;
        let (m, n) = (a.rows(), a.cols());
        // tau * sigma * ||A||^2 = 0.98 < 1
        let eta = 0.99 / (self.norm * 1.01);
        // tau = eta * omega, sigma = eta / omega
        let mut omega = 1.0 / (n as f64).sqrt().max(1.0);

        let mut z = vec![0.0; n];
        let mut z_bar = vec![0.0; n];
        let mut u = vec![0.0; m];
        let mut az = vec![0.0; m];
        let mut atu = vec![0.0; n];
        let mut z_sum = vec![0.0; n];
        let mut u_sum = vec![0.0; m];
        let mut z_avg = vec![0.0; n];
        let mut u_avg = vec![0.0; m];
        let mut az_avg = vec![0.0; m];
        let mut atu_avg = vec![0.0; n];
        let mut z_anchor = vec![0.0; n];
        let mut u_anchor = vec![0.0; m];
        let mut kkt_anchor = (1.0 - e).max(0.0);
        let mut kkt_last = f64::INFINITY;
        let mut since_restart = 0usize;
        let mut best_dual = f64::NEG_INFINITY;
        let mut best_gap = f64::INFINITY;
        // with eps > 0 a candidate depends only on its signed support
        let mut tried: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();
        // polish a primal support only once it survives two checks in a row
        let mut prev_exact: Vec<usize> = Vec::new();
        // polishing is paid from a flop allowance earned by iterations, so
        // large supports are tried rarely and small ones at every check
        let mut credit = 0.0f64;
        let iter_flops = 4.0 * (m * n) as f64;

        for it in 1..=self.settings.max_iter {
            let tau = eta * omega;
            let sigma = eta / omega;
            // dual step: u = prox_{sigma g*}(u + sigma A z_bar)
            a.matvec_into(&z_bar, &mut az);
            for i in 0..m {
                u[i] += sigma * az[i];
            }
            project_dual(&mut u, b, e, sigma);
            // primal step: z = soft(z - tau A^T u, tau)
            a.matvec_t_into(&u, &mut atu);
            for j in 0..n {
                let prev = z[j];
                let next = soft(prev - tau * atu[j], tau);
                z[j] = next;
                z_bar[j] = 2.0 * next - prev;
                z_sum[j] += next;
            }
            for i in 0..m {
                u_sum[i] += u[i];
            }
            since_restart += 1;

            if it % self.settings.check_every != 0 && it != self.settings.max_iter {
                continue;
            }
            best_dual = best_dual.max(dual_bound(&u, &atu, b, e));
            credit += self.settings.check_every as f64 * iter_flops;

            if self.settings.polish {
                let zmax = z.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                let exact: Vec<usize> = (0..n).filter(|&j| z[j] != 0.0).collect();
                let large: Vec<usize> = (0..n).filter(|&j| z[j].abs() > 1e-3 * zmax).collect();
                let primal_signs: Vec<f64> = z.iter().map(|v| v.signum()).collect();
                // optimal supports sit inside the dual's active set |A^T lambda| = 1
                let scale = atu.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
                let active: Vec<usize> = (0..n)
                    .filter(|&j| atu[j].abs() >= (1.0 - 1e-3) * scale)
                    .collect();
                let dual_signs: Vec<f64> = atu.iter().map(|v| -v.signum()).collect();
                let stable = exact == prev_exact;
                prev_exact.clone_from(&exact);
                let mut supports = Vec::new();
                if stable {
                    supports.push((exact, &primal_signs));
                }
                if supports.iter().all(|(s, _)| *s != large) {
                    supports.push((large, &primal_signs));
                }
                if supports.iter().all(|(s, _)| *s != active) {
                    supports.push((active, &dual_signs));
                }
                for (support, signs) in supports.iter().filter(|(s, _)| s.len() <= m) {
                    let cost = 2.0 * (m * support.len() * support.len()) as f64;
                    if cost > credit {
                        continue;
                    }
                    if e > 0.0 {
                        let key = support
                            .iter()
                            .map(|&j| {
                                if signs[j] < 0.0 {
                                    -(j as i64) - 1
                                } else {
                                    j as i64
                                }
                            })
                            .collect();
                        if !tried.insert(key) {
                            continue;
                        }
                    }
                    credit -= cost;
                    if let Some(c) = self.polish(support, signs, &u, b, e) {
                        let feasible = c.residual <= e + feas_tol;
                        let gap = relative_gap(
                            c.objective,
                            c.dual.map_or(best_dual, |d| d.max(best_dual)),
                        )
                        .max(0.0);
                        if feasible && gap <= self.settings.tol_dual {
                            return (c.z, it, true, gap, true);
                        }
                    }
                }
            }

            a.matvec_into(&z, &mut az);
            let res = residual_norm(&az, b);
            let gap = relative_gap(l1_norm(&z), best_dual);
            if res <= e + feas_tol {
                best_gap = best_gap.min(gap);
                if gap <= self.settings.tol_dual {
                    return (z, it, true, gap, false);
                }
            }

            // restart bookkeeping
            let count = since_restart as f64;
            for j in 0..n {
                z_avg[j] = z_sum[j] / count;
            }
            for i in 0..m {
                u_avg[i] = u_sum[i] / count;
            }
            a.matvec_into(&z_avg, &mut az_avg);
            a.matvec_t_into(&u_avg, &mut atu_avg);
            best_dual = best_dual.max(dual_bound(&u_avg, &atu_avg, b, e));
            let kkt_cur = kkt_error(&z, &az, &u, &atu, b, e);
            let kkt_avg = kkt_error(&z_avg, &az_avg, &u_avg, &atu_avg, b, e);
            let use_avg = kkt_avg < kkt_cur;
            let kkt_cand = kkt_cur.min(kkt_avg);
            let restart = kkt_cand <= 0.2 * kkt_anchor
                || (kkt_cand <= 0.8 * kkt_anchor && kkt_cand > kkt_last)
                || since_restart as f64 >= 0.36 * it as f64;
            if !restart {
                kkt_last = kkt_cand;
                continue;
            }
            if use_avg {
                z.copy_from_slice(&z_avg);
                u.copy_from_slice(&u_avg);
            }
            let dz = distance(&z, &z_anchor);
            let du = distance(&u, &u_anchor);
            if dz > 1e-10 && du > 1e-10 {
                omega = (0.5 * (dz / du).ln() + 0.5 * omega.ln()).exp();
            }
            z_bar.copy_from_slice(&z);
            z_anchor.copy_from_slice(&z);
            u_anchor.copy_from_slice(&u);
            z_sum.iter_mut().for_each(|v| *v = 0.0);
            u_sum.iter_mut().for_each(|v| *v = 0.0);
            kkt_anchor = kkt_cand;
            kkt_last = f64::INFINITY;
            since_restart = 0;
        }
        (z, self.settings.max_iter, false, best_gap, false)
    }

    /// Solves the problem restricted to `support` and tries to certify it.
    fn polish(
        &self,
        support: &[usize],
        sign_of: &[f64],
        u: &[f64],
        b: &[f64],
        e: f64,
    ) -> Option<Candidate> {
        let a = self.a;
        let (m, n) = (a.rows(), a.cols());
        let mut support = support.to_vec();
        let mut signs: Vec<f64> = support.iter().map(|&j| sign_of[j]).collect();
        if signs.contains(&0.0) {
            return None;
        }
        let zs = loop {
            if support.is_empty() && !(e > 0.0 && l2_norm(b) >= e) {
                break Vec::new();
            }
            let (x_ls, r_ls, qr) = if support.is_empty() {
                (Vec::new(), l2_norm(b), None)
            } else {
                let qr = Qr::new(&a.select_columns(&support)).ok()?;
                if !qr.full_rank(1e-10) {
                    return None;
                }
                let (x, r) = qr.least_squares(b);
                (x, r, Some(qr))
            };
            if e == 0.0 {
                break x_ls;
            }
            if r_ls < e {
                let qr = qr?;
                let g = qr.solve_gram(&signs);
                let q = dot(&signs, &g);
                if !(q > 0.0) {
                    return None;
                }
                let t = ((e * e - r_ls * r_ls) / q).sqrt();
                break x_ls.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            }
            // the ball is out of reach on this support: add the column most
            // correlated with the least-squares residual
            if support.len() >= m {
                return None;
            }
            let mut fit = vec![0.0; m];
            let mut tmp = vec![0.0; n];
            for (&j, &v) in support.iter().zip(&x_ls) {
                tmp[j] = v;
            }
            a.matvec_into(&tmp, &mut fit);
            let resid: Vec<f64> = b.iter().zip(&fit).map(|(p, q)| p - q).collect();
            a.matvec_t_into(&resid, &mut tmp);
            let pick = (0..n)
                .filter(|j| !support.contains(j))
                .map(|j| {
                    let col = a.column(j);
                    let norm = l2_norm(col);
                    (j, if norm > 0.0 { tmp[j] / norm } else { 0.0 })
                })
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))?;
            if pick.1 == 0.0 {
                return None;
            }
            let pos = support.partition_point(|&j| j < pick.0);
            support.insert(pos, pick.0);
            signs.insert(pos, pick.1.signum());
        };
        let support = support.as_slice();
        let mut full = vec![0.0; n];
        for (&j, &v) in support.iter().zip(&zs) {
            full[j] = v;
        }
        let mut az = vec![0.0; a.rows()];
        a.matvec_into(&full, &mut az);
        let residual = residual_norm(&az, b);
        let objective = l1_norm(&full);

        // dual certificate: lambda with A_S^T lambda = signs and |A^T lambda| <= 1
        let lambda: Vec<f64> = if e == 0.0 {
            // move the iterate's dual (-u) onto {A_S^T lambda = signs}
            let mut lam: Vec<f64> = u.iter().map(|v| -v).collect();
            if !support.is_empty() {
                let a_s = a.select_columns(support);
                let qr = Qr::new(&a_s).ok()?;
                let rhs: Vec<f64> = signs
                    .iter()
                    .zip(a_s.matvec_t(&lam).ok()?)
                    .map(|(s, v)| s - v)
                    .collect();
                let corr = a_s.matvec(&qr.solve_gram(&rhs)).ok()?;
                lam.iter_mut().zip(&corr).for_each(|(l, c)| *l += c);
            }
            lam
        } else {
            let t = residual;
            if t == 0.0 {
                return None;
            }
            // lambda = -(A z - b) / mu with mu fixed by A_S^T lambda = signs
            let r: Vec<f64> = az.iter().zip(b).map(|(p, q)| p - q).collect();
            let atr = a.select_columns(support).matvec_t(&r).ok()?;
            let scale = if support.is_empty() {
                -1.0
            } else {
                signs[0] / atr[0]
            };
            if !(scale < 0.0) {
                return None;
            }
            r.iter().map(|v| v * scale).collect()
        };
        let at_lambda = a.matvec_t(&lambda).ok()?;
        let dual_feasible = at_lambda.iter().all(|v| v.abs() <= 1.0 + 1e-12);
        let dual_value = dot(b, &lambda) - e * l2_norm(&lambda);
        let dual = if dual_feasible {
            Some(dual_value)
        } else {
            None
        };
        Some(Candidate {
            z: full,
            residual,
            objective,
            dual,
        })
    }
}

#[inline]
fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `u <- u - sigma * proj_B(u / sigma)` with `B` the ball of radius `e` at `b`.
fn project_dual(u: &mut [f64], b: &[f64], e: f64, sigma: f64) {
    let mut dist2 = 0.0;
    for (ui, bi) in u.iter().zip(b) {
        let d = ui / sigma - bi;
        dist2 += d * d;
    }
    let dist = dist2.sqrt();
    let shrink = if dist > e { e / dist } else { 1.0 };
    for (ui, bi) in u.iter_mut().zip(b) {
        let w = *ui / sigma;
        let p = bi + (w - bi) * shrink;
        *ui -= sigma * p;
    }
}

/// Lower bound `-<b, u> - e ||u||` from `lambda = -u`, scaled into the
/// dual-feasible set `||A^T lambda||_inf <= 1`.
fn dual_bound(u: &[f64], atu: &[f64], b: &[f64], e: f64) -> f64 {
    let inf = atu.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    (-dot(b, u) - e * l2_norm(u)) / inf
}

/// Combined primal residual, dual infeasibility and duality gap.
fn kkt_error(z: &[f64], az: &[f64], u: &[f64], atu: &[f64], b: &[f64], e: f64) -> f64 {
    let primal = (residual_norm(az, b) - e).max(0.0);
    let dual: f64 = atu
        .iter()
        .map(|v| (v.abs() - 1.0).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let gap = l1_norm(z) - (-dot(b, u) - e * l2_norm(u));
    (primal * primal + dual * dual + gap * gap).sqrt()
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

fn residual_norm(az: &[f64], b: &[f64]) -> f64 {
    let r: Vec<f64> = az.iter().zip(b).map(|(p, q)| p - q).collect();
    l2_norm(&r)
}

fn relative_gap(primal: f64, dual: f64) -> f64 {
    (primal - dual) / primal.abs().max(1e-300)
}

/// Exhaustive sparse oracle: among supports of size `<= k` admitting an exact
/// least-squares fit, returns the fit with the smallest l1 norm. Ties go to
/// the lexicographically smallest support.
pub fn oracle_solve(a: &DenseMatrix, y: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = a.cols();
    if y.len() != a.rows() {
        return Err(Error::dims("y length does not match A"));
    }
    let budget: f64 = (0..=k.min(n)).map(|s| binomial(n, s)).sum();
    if budget > 1e6 {
        return Err(Error::BudgetExceeded(format!(
            "{budget:.0} supports to enumerate"
        )));
    }
    let ynorm = l2_norm(y);
    let tol = 1e-9 * ynorm.max(1.0);
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut best_res = f64::INFINITY;
    for size in 0..=k.min(n) {
        let mut s: Vec<usize> = (0..size).collect();
        loop {
            let (coef, res) = if size == 0 {
                (Vec::new(), ynorm)
            } else {
                let a_s = a.select_columns(&s);
                match Qr::new(&a_s) {
                    Ok(qr) if qr.full_rank(1e-12) => qr.least_squares(y),
                    _ => (Vec::new(), f64::INFINITY),
                }
            };
            best_res = best_res.min(res);
            if res <= tol {
                let obj = l1_norm(&coef);
                let better = match &best {
                    None => true,
                    Some((bo, bs, _)) => {
                        obj < bo - 1e-12 * bo.max(1.0)
                            || ((obj - bo).abs() <= 1e-12 * bo.max(1.0) && s < *bs)
                    }
                };
                if better {
                    best = Some((obj, s.clone(), coef));
                }
            }
            if size == 0 || !crate::sensing::next_combination(&mut s, n) {
                break;
            }
        }
    }
    let (_, support, coef) = best.ok_or(Error::Infeasible {
        distance: best_res,
        epsilon: tol,
    })?;
    let mut z = vec![0.0; n];
    for (&j, &v) in support.iter().zip(&coef) {
        z[j] = v;
    }
    Ok(z)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Error constant `C_2 = 4 sqrt(1 + d) / (1 - (1 + sqrt 2) d)` for a
/// restricted isometry constant `d = delta_2k` in `[0, sqrt 2 - 1)`.
pub fn c2_constant(delta_2k: f64) -> Result<f64> {
    let limit = std::f64::consts::SQRT_2 - 1.0;
    if !(0.0..limit).contains(&delta_2k) {
        return Err(Error::arg(format!(
            "delta_2k = {delta_2k} outside [0, sqrt(2) - 1)"
        )));
    }
    Ok(4.0 * (1.0 + delta_2k).sqrt() / (1.0 - (1.0 + std::f64::consts::SQRT_2) * delta_2k))
}
