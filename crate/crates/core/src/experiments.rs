//! Monte-Carlo sweeps over one system parameter.
//!
//! Trial `t` always draws its network from the same generator stream, so
//! every axis value sees the same channel realizations and comparisons
//! between values (or between scenarios sharing a seed) are paired.
//! Infeasible trials are left out of the mean and counted.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::assignment::{solve_network, SystemConfig};
use crate::channel::{sample_trial, trial_rng, ChannelStats, NetworkRealization, PAIRING_STREAM};
use crate::error::InputError;
use crate::power_control::{PairPolicy, QosSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("a scenario needs at least one trial")]
    NoTrials,
    #[error("a scenario needs at least one pair")]
    NoPairs,
    #[error("the {0} sweep has no values")]
    EmptySweep(SweepAxis),
    #[error("all {trials} trials are infeasible at {axis} = {value:e} (linear); raise the budgets or lower r_th")]
    AllInfeasible {
        axis: SweepAxis,
        value: f64,
        trials: usize,
    },
}

/// Parameter varied by a sweep. Values are linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    BsPower,
    RelayBudget,
    SiMean,
    D2dMean,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::BsPower => "p_bs",
            SweepAxis::RelayBudget => "p_d_max",
            SweepAxis::SiMean => "lambda_si",
            SweepAxis::D2dMean => "lambda_d",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// `k`-th weakest weak user with the `k`-th strongest strong user.
    Reversed,
    /// `k`-th weakest weak user with the `k`-th weakest strong user.
    Aligned,
    /// Uniformly random permutation.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pairing {
    Hungarian,
    Baseline(Baseline),
}

/// Fixed pairing of trial `trial`: entry `m` is the weak partner of strong
/// user `m`. Random pairings come from the trial's pairing stream.
pub fn baseline_pairing(kind: Baseline, k: usize, seed: u64, trial: u64) -> Vec<usize> {
    let mut pairing: Vec<usize> = (0..k).collect();
    match kind {
        Baseline::Reversed => pairing.reverse(),
        Baseline::Aligned => {}
        Baseline::Random => pairing.shuffle(&mut trial_rng(seed, trial, PAIRING_STREAM)),
    }
    pairing
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Everything needed to run a sweep except the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub stats: ChannelStats,
    pub k: usize,
    pub p_bs: f64,
    pub p_d_max: f64,
    pub qos: QosSpec,
    pub policy: PairPolicy,
    pub pairing: Pairing,
    pub trials: usize,
    /// Overrides the matching fixed parameter at each point.
    pub sweep: Sweep,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        if self.k == 0 {
            return Err(ExperimentError::NoPairs);
        }
        if self.sweep.values.is_empty() {
            return Err(ExperimentError::EmptySweep(self.sweep.axis));
        }
        for &v in &self.sweep.values {
            self.point(v)?;
        }
        Ok(())
    }

    /// Channel statistics and system configuration at one axis value.
    pub fn point(&self, value: f64) -> Result<(ChannelStats, SystemConfig), InputError> {
        let mut stats = self.stats;
        let (mut p_bs, mut p_d_max) = (self.p_bs, self.p_d_max);
        match self.sweep.axis {
            SweepAxis::BsPower => p_bs = value,
            SweepAxis::RelayBudget => p_d_max = value,
            SweepAxis::SiMean => stats.lambda_si = value,
            SweepAxis::D2dMean => stats.lambda_d = value,
        }
        let stats = ChannelStats::new(stats.lambda_s, stats.lambda_w, stats.lambda_d, stats.lambda_si)?;
        let config = SystemConfig::new(p_bs, p_d_max, self.qos, self.policy)?;
        Ok((stats, config))
    }
}

/// Network total rate under `pairing`, `None` if infeasible.
pub fn network_rate(
    net: &NetworkRealization,
    config: &SystemConfig,
    pairing: Pairing,
    seed: u64,
    trial: u64,
) -> Option<f64> {
    match pairing {
        Pairing::Hungarian => solve_network(net, config).ok().map(|s| s.assignment.total_rate),
        Pairing::Baseline(kind) => baseline_pairing(kind, net.k(), seed, trial)
            .into_iter()
            .enumerate()
            .map(|(m, n)| config.solve_pair(net, m, n).map(|s| s.sum_rate))
            .sum(),
    }
}

/// Network total of every trial, indexed `[axis value][trial]`.
pub fn trial_rates(sc: &Scenario, seed: u64) -> Result<Vec<Vec<Option<f64>>>, ExperimentError> {
    sc.validate()?;
    let points: Vec<_> = sc
        .sweep
        .values
        .iter()
        .map(|&v| sc.point(v))
        .collect::<Result<_, _>>()?;
    let by_trial: Vec<Vec<Option<f64>>> = (0..sc.trials as u64)
        .into_par_iter()
        .map(|t| {
            points
                .iter()
                .map(|(stats, config)| {
                    let net = sample_trial(stats, sc.k, seed, t);
                    network_rate(&net, config, sc.pairing, seed, t)
                })
                .collect()
        })
        .collect();
    Ok((0..points.len())
        .map(|i| by_trial.iter().map(|row| row[i]).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    /// Mean network total over feasible trials.
    pub mean_sum_rate: f64,
    /// Standard error of that mean; zero with fewer than two feasible trials.
    pub stderr: f64,
    pub infeasible: usize,
    pub trials: usize,
    /// `mean_sum_rate / K`.
    pub mean_pair_rate: f64,
}

impl SweepRow {
    pub fn infeasible_frac(&self) -> f64 {
        self.infeasible as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

/// Averages of [`trial_rates`] at every axis value.
pub fn run_scenario(sc: &Scenario, seed: u64) -> Result<SweepResult, ExperimentError> {
    let rates = trial_rates(sc, seed)?;
    let rows = sc
        .sweep
        .values
        .iter()
        .zip(&rates)
        .map(|(&value, trials)| {
            let ok: Vec<f64> = trials.iter().flatten().copied().collect();
            if ok.is_empty() {
                return Err(ExperimentError::AllInfeasible {
                    axis: sc.sweep.axis,
                    value,
                    trials: trials.len(),
                });
            }
            let (mean, stderr) = mean_stderr(&ok);
            Ok(SweepRow {
                axis: value,
                mean_sum_rate: mean,
                stderr,
                infeasible: trials.len() - ok.len(),
                trials: trials.len(),
                mean_pair_rate: mean / sc.k as f64,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepResult {
        axis: sc.sweep.axis,
        rows,
    })
}

/// Sample mean and its standard error, with pairwise summation.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::db_to_linear;
    use crate::power_control::{RelayPower, Strategy};

    fn scenario(policy: PairPolicy, pairing: Pairing, sweep: Sweep, trials: usize, k: usize) -> Scenario {
        Scenario {
            stats: ChannelStats::from_db(10.0, 0.0, 6.0, 0.0).unwrap(),
            k,
            p_bs: db_to_linear(30.0),
            p_d_max: db_to_linear(30.0),
            qos: QosSpec::new(1.0).unwrap(),
            policy,
            pairing,
            trials,
            sweep,
        }
    }

    fn adaptive(strategy: Strategy) -> PairPolicy {
        PairPolicy::new(strategy, RelayPower::Adaptive)
    }

    fn bs_sweep(db: &[f64]) -> Sweep {
        Sweep {
            axis: SweepAxis::BsPower,
            values: db.iter().map(|&d| db_to_linear(d)).collect(),
        }
    }

    #[test]
    fn baselines_by_definition() {
        for kind in [Baseline::Reversed, Baseline::Aligned, Baseline::Random] {
            assert_eq!(baseline_pairing(kind, 1, 5, 0), vec![0]);
        }
        assert_eq!(baseline_pairing(Baseline::Reversed, 3, 0, 0), vec![2, 1, 0]);
        assert_eq!(baseline_pairing(Baseline::Aligned, 3, 0, 0), vec![0, 1, 2]);
    }

    #[test]
    fn reversed_pairs_weakest_with_strongest() {
        // Weak gains 1, 2, 3 and strong gains 10, 20, 30; D2D gain encodes m and n.
        let d2d: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let net = NetworkRealization::new(vec![30.0, 1.0, 20.0, 2.0, 10.0, 3.0], d2d, vec![0.0; 3]).unwrap();
        let p = baseline_pairing(Baseline::Reversed, 3, 0, 0);
        let pairs: Vec<(f64, f64)> = p.iter().enumerate().map(|(m, &n)| (net.weak_gain(n), net.strong_gain(m))).collect();
        assert_eq!(pairs, vec![(3.0, 10.0), (2.0, 20.0), (1.0, 30.0)]);
    }

    #[test]
    fn random_pairing_is_uniform() {
        let n = 10_000u64;
        let mut counts = std::collections::HashMap::new();
        for seed in 0..n {
            *counts.entry(baseline_pairing(Baseline::Random, 4, seed, 0)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let expect = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        let mut chi2 = 0.0;
        for &c in counts.values() {
            assert!((c as f64 - expect).abs() <= 3.0 * sd, "{c}");
            chi2 += (c as f64 - expect).powi(2) / expect;
        }
        // 99.9% quantile of chi-square with 23 degrees of freedom.
        assert!(chi2 < 49.73, "{chi2}");
    }

    #[test]
    fn single_trial_is_one_network_solve() {
        let sc = scenario(adaptive(Strategy::ModeSelect), Pairing::Hungarian, bs_sweep(&[30.0]), 1, 4);
        let res = run_scenario(&sc, 42).unwrap();
        let (stats, config) = sc.point(sc.sweep.values[0]).unwrap();
        let net = sample_trial(&stats, 4, 42, 0);
        let sol = solve_network(&net, &config).unwrap();
        assert_eq!(res.rows[0].mean_sum_rate, sol.assignment.total_rate);
        assert_eq!(res.rows[0].stderr, 0.0);
        assert_eq!(res.rows[0].mean_pair_rate, sol.assignment.total_rate / 4.0);
    }

    #[test]
    fn reproducible() {
        let sc = scenario(adaptive(Strategy::FullDuplex), Pairing::Baseline(Baseline::Random), bs_sweep(&[20.0, 30.0]), 50, 3);
        assert_eq!(run_scenario(&sc, 9).unwrap(), run_scenario(&sc, 9).unwrap());
    }

    #[test]
    fn cooperation_beats_noma() {
        let sweep = bs_sweep(&[20.0, 30.0, 40.0]);
        let sel = trial_rates(&scenario(adaptive(Strategy::ModeSelect), Pairing::Hungarian, sweep.clone(), 300, 3), 1).unwrap();
        let noma = trial_rates(&scenario(adaptive(Strategy::Noma), Pairing::Hungarian, sweep, 300, 3), 1).unwrap();
        for (s, n) in sel.iter().zip(&noma) {
            for (a, b) in s.iter().zip(n) {
                if let Some(b) = b {
                    assert!(a.unwrap() >= b - 1e-12);
                }
            }
        }
    }

    #[test]
    fn si_sweep_is_nonincreasing() {
        let sweep = Sweep {
            axis: SweepAxis::SiMean,
            values: [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0].map(db_to_linear).to_vec(),
        };
        let mut sc = scenario(adaptive(Strategy::FullDuplex), Pairing::Hungarian, sweep, 300, 1);
        sc.stats = ChannelStats::from_db(12.0, 3.0, 12.0, 0.0).unwrap();
        let rates = trial_rates(&sc, 3).unwrap();
        for t in 0..sc.trials {
            for w in rates.windows(2) {
                if let (Some(a), Some(b)) = (w[0][t], w[1][t]) {
                    assert!(b <= a + 1e-12, "trial {t}: {a} -> {b}");
                }
            }
        }
    }

    #[test]
    fn every_trial_infeasible_is_an_error() {
        let sc = scenario(adaptive(Strategy::ModeSelect), Pairing::Hungarian, bs_sweep(&[-40.0]), 20, 2);
        assert!(matches!(run_scenario(&sc, 0), Err(ExperimentError::AllInfeasible { trials: 20, .. })));
    }

    #[test]
    fn invalid_scenarios() {
        let mut sc = scenario(adaptive(Strategy::FullDuplex), Pairing::Hungarian, bs_sweep(&[]), 1, 1);
        assert!(matches!(sc.validate(), Err(ExperimentError::EmptySweep(_))));
        sc.sweep = bs_sweep(&[10.0]);
        sc.trials = 0;
        assert_eq!(sc.validate(), Err(ExperimentError::NoTrials));
        sc.trials = 1;
        sc.sweep.values = vec![-1.0];
        assert!(matches!(sc.validate(), Err(ExperimentError::Input(_))));
    }

    #[test]
    fn fixed_relay_variant() {
        use crate::power_control::{fd_optimal, hd_intersection_power, hd_optimal, PairProblem};
        use crate::rates::PairChannels;
        let fixed = |s| PairPolicy::new(s, RelayPower::Fixed);
        let stats = ChannelStats::from_db(10.0, 0.0, 6.0, 0.0).unwrap();
        let mut budget_limited = 0;
        for t in 0..2000u64 {
            let net = sample_trial(&stats, 1, 77, t);
            let p_d_max = db_to_linear((t % 40) as f64 - 30.0);
            let pr = PairProblem::new(net.pair(0, 0), db_to_linear(30.0), p_d_max, QosSpec::new(1.0).unwrap()).unwrap();
            for s in [Strategy::HalfDuplex, Strategy::FullDuplex, Strategy::ModeSelect] {
                if let Some(f) = fixed(s).solve(&pr) {
                    assert!(adaptive(s).solve(&pr).unwrap().sum_rate >= f.sum_rate - 1e-12);
                }
            }
            if let Ok(hd) = hd_optimal(&pr) {
                if p_d_max <= hd_intersection_power(&pr) {
                    budget_limited += 1;
                    assert_eq!(fixed(Strategy::HalfDuplex).solve(&pr), Some(hd));
                }
            }
        }
        assert!(budget_limited > 100, "{budget_limited}");

        // Strong self-interference: relaying at full power hurts.
        let ch = PairChannels::new(10.0, 0.5, 1.0, 10.0).unwrap();
        let pr = PairProblem::new(ch, 100.0, 10.0, QosSpec::new(1.0).unwrap()).unwrap();
        let ad = fd_optimal(&pr).unwrap().sum_rate;
        assert!(fixed(Strategy::FullDuplex).solve(&pr).map_or(true, |f| f.sum_rate < ad - 1e-3));
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // Sample variance 5/3.
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
