//! `tensorcs` command-line driver.
//!
//! Exit codes: 0 ok, 2 usage or IO, 3 contract mismatch, 4 numerical failure.
//! The resolved seed is printed to stderr on every run. `TENSORCS_THREADS`
//! caps the worker pool. Output is never colored.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tensorcs::io::{read_signal, write_dtf1};
use tensorcs::l1::{oracle_solve, solve_bp};
use tensorcs::pipeline::{
    dct_sparsify, per_mode_measurements, rows_to_csv, run_sweep, summarize, summary_to_csv,
    ExperimentConfig,
};
use tensorcs::recovery::{
    recover, relative_error, verify_rank_preservation, Method, RecoveryProblem,
    DEFAULT_MEMORY_BUDGET,
};
use tensorcs::rng::derive_seed;
use tensorcs::sensing::{
    add_noise, check_nsp_exhaustive, generate_ensemble, plan_measurements, random_sparse, sample,
    Distribution, MeasurementEnsemble,
};
use tensorcs::{DenseTensor, Error, SolverSettings};

#[derive(Parser, Debug)]
#[command(
    name = "tensorcs",
    version,
    about = "Mode-wise compressed sensing of sparse tensors"
)]
struct Cli {
    /// Seed for all random draws (default 0; `sweep` defaults to the config's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Keep a low-frequency DCT box of a signal and write the target as DTF1.
    Sparsify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Per-mode box sizes, e.g. 16,16.
        #[arg(long, value_delimiter = ',', required = true)]
        keep: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-mode and Kronecker measurement counts for a sparsity level.
    Plan {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Draw an ensemble, sample a signal, optionally add noise.
    Sense {
        #[arg(long = "in")]
        input: PathBuf,
        /// Per-mode measurement counts.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "normalized",
            required_unless_present = "normalized"
        )]
        m: Vec<usize>,
        /// Total measurements over signal size; split equally across modes.
        #[arg(long)]
        normalized: Option<f64>,
        #[arg(long, value_enum, default_value_t = Dist::Gaussian)]
        distribution: Dist,
        #[arg(long, default_value_t = 0.0)]
        noise_std: f64,
        /// Observation tensor (DTF1).
        #[arg(long)]
        out: PathBuf,
        /// Ensemble sidecar JSON; matrices are written next to it.
        #[arg(long)]
        ensemble: PathBuf,
    },
    /// Recover a signal from observations and an ensemble.
    Recover {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        k: usize,
        /// Per-mode fiber sparsity, overriding k per mode.
        #[arg(long, value_delimiter = ',')]
        per_mode_k: Option<Vec<usize>>,
        /// Noise bound; a positive value selects the noisy variant.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Restricted isometry constant used for the reported error bound.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
        memory_budget: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include wall-clock seconds in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Run an experiment grid from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        summary_csv: Option<PathBuf>,
    },
    /// Run invariant suites; exit 0 iff all pass.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Dist {
    Gaussian,
    Bernoulli,
    Identity,
}

impl From<Dist> for Distribution {
    fn from(d: Dist) -> Self {
        match d {
            Dist::Gaussian => Distribution::Gaussian,
            Dist::Bernoulli => Distribution::Bernoulli,
            Dist::Identity => Distribution::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Suite {
    Nsp,
    Agreement,
    Rank,
    All,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Format(_) | Error::InvalidArgument(_) => 2,
        Error::Contract(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidMode { .. }
        | Error::MemoryBudget { .. } => 3,
        Error::SolverFailure { .. }
        | Error::Infeasible { .. }
        | Error::NonFinite
        | Error::BudgetExceeded(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("TENSORCS_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                // fails only if a pool exists already, which cannot happen here
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: TENSORCS_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> tensorcs::Result<u8> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Sparsify { input, keep, out } => {
            eprintln!("seed: {seed}");
            let x = read_signal(&input)?;
            let target = dct_sparsify(&x, &keep)?;
            write_dtf1(&out, &target)?;
            println!("k = {}", keep.iter().product::<usize>());
        }
        Command::Plan { dims, k, c } => {
            eprintln!("seed: {seed}");
            let plan = plan_measurements(&dims, k, c)?;
            println!("{:>4} {:>6} {:>6}  clamped", "mode", "N", "m");
            for (i, ((n, m), cl)) in plan
                .dims
                .iter()
                .zip(&plan.per_mode_m)
                .zip(&plan.clamped)
                .enumerate()
            {
                println!(
                    "{:>4} {n:>6} {m:>6}  {}",
                    i + 1,
                    if *cl { "yes" } else { "no" }
                );
            }
            println!("gtcs total: {}", plan.total_m_gtcs);
            println!("kcs total: {}", plan.total_m_kcs);
            let verdict = if plan.gtcs_ratio_worse {
                "the Kronecker scheme needs fewer measurements"
            } else {
                "the mode-wise scheme needs no more measurements than the Kronecker scheme"
            };
            println!("verdict: {verdict}");
        }
        Command::Sense {
            input,
            m,
            normalized,
            distribution,
            noise_std,
            out,
            ensemble,
        } => {
            eprintln!("seed: {seed}");
            let x = read_signal(&input)?;
            let m = match normalized {
                Some(nm) if nm > 0.0 && nm <= 1.0 => per_mode_measurements(x.dims(), nm),
                Some(nm) => {
                    return Err(Error::InvalidArgument(format!(
                        "--normalized {nm} outside (0, 1]"
                    )))
                }
                None => m,
            };
            let ens = generate_ensemble(x.dims(), &m, distribution.into(), seed)?;
            let (y, eps) = add_noise(&sample(&x, &ens)?, noise_std, seed)?;
            write_dtf1(&out, &y)?;
            ens.save(&ensemble)?;
            println!("m = {m:?}");
            println!("noise norm = {eps:e}");
        }
        Command::Recover {
            obs,
            ensemble,
            method,
            k,
            per_mode_k,
            epsilon,
            delta,
            memory_budget,
            out,
            report,
            timing,
        } => {
            eprintln!("seed: {seed}");
            let y = tensorcs::io::read_dtf1(&obs)?;
            let ens = MeasurementEnsemble::load(&ensemble)?;
            let mut p = RecoveryProblem::new(y, ens, k)?.with_epsilon(epsilon)?;
            p.per_mode_k = per_mode_k;
            p.delta_2k = delta;
            p.memory_budget = memory_budget;
            p.validate()?;
            let r = recover(method, &p)?;
            write_dtf1(&out, &r.x_hat)?;
            if let Some(path) = report {
                std::fs::write(path, r.to_json(timing)?)?;
            }
            println!(
                "method = {}{}",
                r.method,
                if r.noisy { " (noisy)" } else { "" }
            );
            if let Some(b) = r.error_bound {
                println!("error bound = {b:e}");
            }
        }
        Command::Sweep {
            config,
            out_csv,
            summary_csv,
        } => {
            let mut cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&config)?)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            eprintln!("seed: {}", cfg.seed);
            let rows = run_sweep(&cfg)?;
            std::fs::write(&out_csv, rows_to_csv(&rows)?)?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| r.status == tensorcs::pipeline::Status::Failed)
                .map(|r| {
                    format!(
                        "{} at {} (noise {}, trial {})",
                        r.method, r.normalized_m, r.noise_std, r.trial
                    )
                })
                .collect();
            for f in &failed {
                eprintln!("failed: {f}");
            }
            let summary = summary_to_csv(&summarize(&rows)?)?;
            if let Some(path) = summary_csv {
                std::fs::write(path, &summary)?;
            }
            print!("{summary}");
        }
        Command::Verify { suite } => {
            eprintln!("seed: {seed}");
            let suites: Vec<(&str, fn(u64) -> tensorcs::Result<Vec<String>>)> = vec![
                ("nsp", verify_nsp),
                ("agreement", verify_agreement),
                ("rank", verify_rank),
            ];
            let mut all_ok = true;
            for (name, f) in suites {
                let wanted = matches!(
                    (suite, name),
                    (Suite::All, _)
                        | (Suite::Nsp, "nsp")
                        | (Suite::Agreement, "agreement")
                        | (Suite::Rank, "rank")
                );
                if !wanted {
                    continue;
                }
                let failures = f(seed)?;
                println!(
                    "{name}: {}",
                    if failures.is_empty() { "PASS" } else { "FAIL" }
                );
                for msg in &failures {
                    eprintln!("{name}: {msg}");
                }
                all_ok &= failures.is_empty();
            }
            return Ok(if all_ok { 0 } else { 4 });
        }
    }
    Ok(0)
}

/// On 6x8 Gaussian fixtures that pass the exact NSP check, basis pursuit
/// must reproduce the sparse oracle.
fn verify_nsp(seed: u64) -> tensorcs::Result<Vec<String>> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..200u64 {
        let s = derive_seed(seed, 0x6e73_70, i);
        let a = generate_ensemble(&[8], &[6], Distribution::Gaussian, s)?
            .matrices
            .remove(0);
        let Some(k) = [2, 1]
            .into_iter()
            .find(|&k| check_nsp_exhaustive(&a, k).unwrap_or(false))
        else {
            continue;
        };
        let x = random_sparse(&[8], k, s)?;
        let y = a.matvec(x.data())?;
        let bp = solve_bp(&a, &y, &SolverSettings::default())?;
        let oracle = oracle_solve(&a, &y, k)?;
        let gap: f64 =
            bp.z.iter()
                .zip(&oracle)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
        if gap > 1e-6 {
            failures.push(format!(
                "fixture {i} (k = {k}): ||bp - oracle|| = {gap:.2e}"
            ));
        }
        checked += 1;
        if checked == 20 {
            break;
        }
    }
    if checked < 20 {
        failures.push(format!("only {checked} NSP fixtures found"));
    }
    Ok(failures)
}

/// Draws a `m x n` Gaussian matrix that passes NSP of order `k`.
fn nsp_ensemble(
    dims: &[usize],
    m: usize,
    k: usize,
    seed: u64,
) -> tensorcs::Result<MeasurementEnsemble> {
    let mut mats = Vec::new();
    let mut draw = 0u64;
    for &n in dims {
        loop {
            let s = derive_seed(seed, 0x6e73_70, draw);
            draw += 1;
            let u = generate_ensemble(&[n], &[m], Distribution::Gaussian, s)?
                .matrices
                .remove(0);
            if check_nsp_exhaustive(&u, k)? {
                mats.push(u);
                break;
            }
        }
    }
    MeasurementEnsemble::from_matrices(mats)
}

/// With NSP-verified mode matrices every method recovers a 3-sparse 12x12
/// signal exactly, so all five must agree.
fn verify_agreement(seed: u64) -> tensorcs::Result<Vec<String>> {
    let mut failures = Vec::new();
    for i in 0..5u64 {
        let s = derive_seed(seed, 0x6167_72, i);
        let x = random_sparse(&[12, 12], 3, s)?;
        let ens = nsp_ensemble(&[12, 12], 10, 3, s)?;
        let p = RecoveryProblem::new(sample(&x, &ens)?, ens, 3)?;
        let mut hats: Vec<(Method, DenseTensor)> = Vec::new();
        for m in Method::ALL {
            match recover(m, &p) {
                Ok(r) => hats.push((m, r.x_hat)),
                Err(e) => failures.push(format!("instance {i}: {m} failed: {e}")),
            }
        }
        for (m, h) in &hats {
            let err = relative_error(h, &x)?;
            if err > 1e-6 {
                failures.push(format!("instance {i}: {m} relative error {err:.2e}"));
            }
        }
    }
    Ok(failures)
}

fn verify_rank(seed: u64) -> tensorcs::Result<Vec<String>> {
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let s = derive_seed(seed, 0x7261_6e, i);
        let x = random_sparse(&[12, 12], 3, s)?.to_matrix()?;
        let ens = nsp_ensemble(&[12, 12], 10, 3, s)?;
        if !verify_rank_preservation(&x, &ens)? {
            failures.push(format!("instance {i}: rank changed under sampling"));
        }
    }
    Ok(failures)
}
