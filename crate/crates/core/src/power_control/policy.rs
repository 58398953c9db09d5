//! Mode selection, the NOMA baseline and per-pair policy dispatch.

use super::{
    fd_fixed_relay, fd_optimal, hd_fixed_relay, hd_optimal, PairProblem, PairSolution,
    PowerError, RegionBounds, RelayMode,
};
use crate::rates::{noma_rates, PowerDecision};

/// Larger sum rate wins; FD on ties.
fn pick(hd: Option<PairSolution>, fd: Option<PairSolution>) -> Option<PairSolution> {
    match (hd, fd) {
        (Some(h), Some(f)) => Some(if f.sum_rate >= h.sum_rate { f } else { h }),
        (h, f) => f.or(h),
    }
}

/// The better of the HD and FD optima, or `None` if neither is feasible.
pub fn mode_select(problem: &PairProblem) -> Option<PairSolution> {
    pick(hd_optimal(problem).ok(), fd_optimal(problem).ok())
}

/// Conventional two-user NOMA without cooperation.
///
/// This is the FD region at `p_d = 0`, so the optimal split is the smallest
/// admissible `alpha`.
pub fn noma_optimal(problem: &PairProblem) -> Result<PairSolution, PowerError> {
    let ch = &problem.channels;
    let alpha = if problem.qos.delta_fd() == 0.0 {
        0.0
    } else {
        if ch.strong() == 0.0 {
            return Err(PowerError::ZeroStrongGain);
        }
        let bounds = RegionBounds::full_duplex(problem);
        let lo = bounds.min_alpha(0.0);
        let hi = bounds.strong_qos(0.0);
        if lo > hi {
            return Err(PowerError::NomaInfeasible);
        }
        lo.clamp(0.0, 1.0)
    };
    let dec = PowerDecision { alpha, p_d: 0.0 };
    Ok(PairSolution::new(RelayMode::Direct, dec, noma_rates(ch, alpha, problem.p_bs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    HalfDuplex,
    FullDuplex,
    ModeSelect,
    Noma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RelayPower {
    /// Closed-form optimal relay power.
    #[default]
    Adaptive,
    /// Relay always transmits at `p_d_max`.
    Fixed,
}

/// How one pair is operated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairPolicy {
    pub strategy: Strategy,
    pub relay: RelayPower,
}

impl PairPolicy {
    pub fn new(strategy: Strategy, relay: RelayPower) -> Self {
        Self { strategy, relay }
    }

    /// Best operating point under this policy, `None` if infeasible.
    pub fn solve(&self, problem: &PairProblem) -> Option<PairSolution> {
        use RelayPower::*;
        use Strategy::*;
        match (self.strategy, self.relay) {
            (Noma, _) => noma_optimal(problem).ok(),
            (HalfDuplex, Adaptive) => hd_optimal(problem).ok(),
            (FullDuplex, Adaptive) => fd_optimal(problem).ok(),
            (ModeSelect, Adaptive) => mode_select(problem),
            (HalfDuplex, Fixed) => hd_fixed_relay(problem),
            (FullDuplex, Fixed) => fd_fixed_relay(problem),
            (ModeSelect, Fixed) => pick(hd_fixed_relay(problem), fd_fixed_relay(problem)),
        }
    }
}
