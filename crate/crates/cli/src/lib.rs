//! Command implementations behind the `cnoma` binary.

pub mod bench;
pub mod config;
pub mod csv;

use std::io::{self, Write};

use cnoma::assignment::{solve_network, SystemConfig};
use cnoma::channel::sample_trial;
use cnoma::experiments::{baseline_pairing, run_scenario, ExperimentError, Pairing};
use cnoma::oracle::verify::verify;
use cnoma::oracle::{GridMode, GridSpec};
use cnoma::PairSolution;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::csv::{Cell, CsvWriter};

/// Largest closed-form vs grid sum-rate gap `verify` accepts.
pub const VERIFY_GAP_TOL: f64 = 1e-4;
/// Largest fraction of feasibility disagreements `verify` accepts.
pub const VERIFY_DISAGREEMENT_RATE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::VerifyFailed(_) => 4,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::AllInfeasible { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Config(ConfigError::Missing(other.to_string())),
        }
    }
}

fn system_config(cfg: &Config) -> Result<SystemConfig, CliError> {
    Ok(SystemConfig::new(cfg.p_bs, cfg.p_d_max, cfg.qos, cfg.policy).map_err(ConfigError::from)?)
}

fn solution_cells(s: &PairSolution) -> [Cell; 6] {
    [
        Cell::Text(s.mode.to_string()),
        Cell::Num(s.decision.alpha),
        Cell::Num(s.decision.p_d),
        Cell::Num(s.rates.strong),
        Cell::Num(s.rates.weak),
        Cell::Num(s.sum_rate),
    ]
}

const SOLUTION_HEADER: [&str; 6] = ["mode", "alpha", "p_d", "rate_strong", "rate_weak", "sum_rate"];

/// Optimal operating point of the pair given by the `gain_*` keys.
pub fn solve_pair(cfg: &Config, out: impl Write) -> Result<(), CliError> {
    let problem = cfg.pair_problem()?;
    let sol = cfg
        .policy
        .solve(&problem)
        .ok_or_else(|| CliError::Infeasible("no power split meets the rate threshold for this pair".into()))?;
    let mut w = CsvWriter::new(out, &SOLUTION_HEADER)?;
    w.row(&solution_cells(&sol))?;
    w.finish()?;
    Ok(())
}

/// Pairs and operating points of one sampled network (trial 0 of the seed).
pub fn solve_network_cmd(cfg: &Config, out: impl Write) -> Result<f64, CliError> {
    let sys = system_config(cfg)?;
    let net = sample_trial(&cfg.stats, cfg.k, cfg.seed, 0);
    let pairs: Vec<(usize, usize, PairSolution)> = match cfg.pairing {
        Pairing::Hungarian => {
            let sol = solve_network(&net, &sys).map_err(|e| CliError::Infeasible(e.to_string()))?;
            sol.assignment
                .pairing
                .iter()
                .zip(sol.pairs)
                .enumerate()
                .map(|(m, (&n, s))| (m, n, s))
                .collect()
        }
        Pairing::Baseline(kind) => baseline_pairing(kind, cfg.k, cfg.seed, 0)
            .into_iter()
            .enumerate()
            .map(|(m, n)| {
                sys.solve_pair(&net, m, n)
                    .map(|s| (m, n, s))
                    .ok_or_else(|| CliError::Infeasible(format!("pair (strong {m}, weak {n}) is infeasible")))
            })
            .collect::<Result<_, _>>()?,
    };
    let mut header = vec!["strong", "weak", "gain_strong", "gain_weak", "gain_d2d", "gain_si"];
    header.extend(SOLUTION_HEADER);
    let mut w = CsvWriter::new(out, &header)?;
    let mut total = 0.0;
    for (m, n, s) in &pairs {
        let mut cells = vec![
            Cell::Int(*m as u64),
            Cell::Int(*n as u64),
            Cell::Num(net.strong_gain(*m)),
            Cell::Num(net.weak_gain(*n)),
            Cell::Num(net.d2d(*m, *n)),
            Cell::Num(net.si(*m)),
        ];
        cells.extend(solution_cells(s));
        w.row(&cells)?;
        total += s.sum_rate;
    }
    w.finish()?;
    Ok(total)
}

pub const SWEEP_HEADER: [&str; 6] = ["axis", "mean_sum_rate", "stderr", "infeasible_frac", "trials", "mean_pair_rate"];

/// Monte-Carlo sweep. The axis column repeats the swept values in the unit
/// of their config key.
pub fn sweep(cfg: &Config, out: impl Write) -> Result<(), CliError> {
    let res = run_scenario(&cfg.scenario(), cfg.seed)?;
    let mut w = CsvWriter::new(out, &SWEEP_HEADER)?;
    for (row, given) in res.rows.iter().zip(&cfg.sweep.given) {
        w.row(&[
            Cell::Num(*given),
            Cell::Num(row.mean_sum_rate),
            Cell::Num(row.stderr),
            Cell::Num(row.infeasible_frac()),
            Cell::Int(row.trials as u64),
            Cell::Num(row.mean_pair_rate),
        ])?;
    }
    w.finish()?;
    Ok(())
}

/// Closed form against the grid oracle on `verify_instances` random
/// instances per relaying mode.
pub fn verify_cmd(cfg: &Config, out: impl Write) -> Result<(), CliError> {
    let spec = GridSpec::default();
    let mut w = CsvWriter::new(
        out,
        &[
            "mode",
            "instances",
            "both_feasible",
            "max_gap",
            "disagreements",
            "far_disagreements",
            "qos_violations",
        ],
    )?;
    let mut failed = Vec::new();
    for (mode, name) in [(GridMode::HalfDuplex, "HD"), (GridMode::FullDuplex, "FD")] {
        let rep = verify(mode, cfg.verify_instances, cfg.seed, &spec);
        w.row(&[
            Cell::Text(name.into()),
            Cell::Int(rep.instances as u64),
            Cell::Int(rep.both_feasible as u64),
            Cell::Num(rep.max_gap),
            Cell::Int(rep.disagreements as u64),
            Cell::Int(rep.far_disagreements as u64),
            Cell::Int(rep.qos_violations as u64),
        ])?;
        if !rep.passes(VERIFY_GAP_TOL, VERIFY_DISAGREEMENT_RATE) {
            failed.push(format!("{name}: {rep:?}"));
        }
    }
    w.finish()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed.join("; ")))
    }
}

/// Phase timings for every `bench_k`, plus the fitted matching exponent.
pub fn bench_cmd(cfg: &Config, out: impl Write) -> Result<f64, CliError> {
    let sys = system_config(cfg)?;
    let rows: Vec<bench::BenchRow> = cfg
        .bench_k
        .iter()
        .map(|&k| bench::bench_k(&cfg.stats, &sys, k, cfg.bench_reps, cfg.seed))
        .collect();
    let mut w = CsvWriter::new(out, &["k", "users", "fill_s", "hungarian_s", "total_s"])?;
    for r in &rows {
        w.row(&[
            Cell::Int(r.k as u64),
            Cell::Int(2 * r.k as u64),
            Cell::Num(r.fill),
            Cell::Num(r.hungarian),
            Cell::Num(r.total),
        ])?;
    }
    w.finish()?;
    Ok(if rows.len() >= 2 { bench::scaling_exponent(&rows) } else { f64::NAN })
}
