//! Closed-form power control against the grid oracle on random instances.
//!
//! Instances draw every gain log-uniformly over [-20, 20] dB, `p_bs` over
//! [0, 50] dB, `p_d_max` over [0, 40] dB and `r_th` from {0.5, 1, 2}.

use rayon::prelude::*;

use super::{grid_optimal, GridMode, GridSpec};
use crate::channel::{trial_rng, unit_uniform};
use crate::power_control::{fd_optimal, hd_optimal, PairProblem, PairSolution, QosSpec};
use crate::rates::PairChannels;

/// Relative budget perturbation that defines a near-boundary instance.
pub const BOUNDARY_REL: f64 = 1e-6;

pub const RATE_THRESHOLDS: [f64; 3] = [0.5, 1.0, 2.0];

/// Instance `index` of the random family under `seed`.
pub fn random_instance(seed: u64, index: u64) -> PairProblem {
    let mut rng = trial_rng(seed, index, 0);
    let mut db = |lo: f64, hi: f64| 10f64.powf((lo + (hi - lo) * unit_uniform(&mut rng)) / 10.0);
    let ch = PairChannels::new(db(-20.0, 20.0), db(-20.0, 20.0), db(-20.0, 20.0), db(-20.0, 20.0))
        .expect("positive gains");
    let p_bs = db(0.0, 50.0);
    let p_d_max = db(0.0, 40.0);
    let pick = ((unit_uniform(&mut rng) * 3.0) as usize).min(2);
    let qos = QosSpec::new(RATE_THRESHOLDS[pick]).expect("positive threshold");
    PairProblem::new(ch, p_bs, p_d_max, qos).expect("valid budgets")
}

pub fn closed_form(problem: &PairProblem, mode: GridMode) -> Option<PairSolution> {
    match mode {
        GridMode::HalfDuplex => hd_optimal(problem).ok(),
        GridMode::FullDuplex => fd_optimal(problem).ok(),
    }
}

/// The closed-form feasibility verdict flips when `p_bs` or `p_d_max`
/// moves by [`BOUNDARY_REL`] relative.
pub fn near_boundary(problem: &PairProblem, mode: GridMode) -> bool {
    let nominal = closed_form(problem, mode).is_some();
    [1.0 - BOUNDARY_REL, 1.0 + BOUNDARY_REL].iter().any(|&f| {
        let bs = PairProblem { p_bs: problem.p_bs * f, ..*problem };
        let relay = PairProblem { p_d_max: problem.p_d_max * f, ..*problem };
        closed_form(&bs, mode).is_some() != nominal || closed_form(&relay, mode).is_some() != nominal
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub closed: Option<PairSolution>,
    pub grid: Option<PairSolution>,
}

impl Check {
    /// Closed-form minus grid sum rate when both are feasible.
    pub fn gap(&self) -> Option<f64> {
        Some(self.closed?.sum_rate - self.grid?.sum_rate)
    }

    pub fn agrees(&self) -> bool {
        self.closed.is_some() == self.grid.is_some()
    }

    /// Solutions that miss a rate threshold by more than `QOS_EPS`.
    pub fn qos_violations(&self, r_th: f64) -> usize {
        [self.closed, self.grid]
            .iter()
            .flatten()
            .filter(|s| !s.meets_qos(r_th))
            .count()
    }
}

pub fn check(problem: &PairProblem, mode: GridMode, spec: &GridSpec) -> Check {
    Check {
        closed: closed_form(problem, mode),
        grid: grid_optimal(problem, mode, spec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub mode: GridMode,
    pub instances: usize,
    pub both_feasible: usize,
    /// Largest `|closed - grid|` over instances where both are feasible.
    pub max_gap: f64,
    pub worst_instance: Option<u64>,
    pub disagreements: usize,
    /// Disagreements not explained by a nearby feasibility boundary.
    pub far_disagreements: usize,
    /// Closed-form or grid solutions that miss the threshold.
    pub qos_violations: usize,
    /// Smallest per-user rate minus threshold over all solutions.
    pub min_qos_margin: f64,
}

impl VerifyReport {
    pub fn disagreement_rate(&self) -> f64 {
        self.disagreements as f64 / self.instances as f64
    }

    pub fn passes(&self, gap_tol: f64, max_disagreement_rate: f64) -> bool {
        self.max_gap <= gap_tol
            && self.far_disagreements == 0
            && self.disagreement_rate() <= max_disagreement_rate
            && self.qos_violations == 0
    }
}

/// Checks instances `0..n` of the random family.
pub fn verify(mode: GridMode, n: u64, seed: u64, spec: &GridSpec) -> VerifyReport {
    let checks: Vec<(PairProblem, Check)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pr = random_instance(seed, i);
            (pr, check(&pr, mode, spec))
        })
        .collect();
    let mut report = VerifyReport {
        mode,
        instances: n as usize,
        both_feasible: 0,
        max_gap: 0.0,
        worst_instance: None,
        disagreements: 0,
        far_disagreements: 0,
        qos_violations: 0,
        min_qos_margin: f64::INFINITY,
    };
    for (i, (pr, c)) in checks.iter().enumerate() {
        let r_th = pr.qos.r_th();
        report.qos_violations += c.qos_violations(r_th);
        for s in [c.closed, c.grid].iter().flatten() {
            report.min_qos_margin = report.min_qos_margin.min(s.rates.min() - r_th);
        }
        if let Some(gap) = c.gap() {
            report.both_feasible += 1;
            if report.worst_instance.is_none() || gap.abs() > report.max_gap {
                report.max_gap = gap.abs();
                report.worst_instance = Some(i as u64);
            }
        } else if !c.agrees() {
            report.disagreements += 1;
            if !near_boundary(pr, mode) {
                report.far_disagreements += 1;
            }
        }
    }
    report
}
