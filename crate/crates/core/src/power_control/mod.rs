//! Per-pair feasibility and optimal power control.
//!
//! For a fixed pair the QoS constraints `R_strong >= R_th` and
//! `R_weak >= R_th` are equivalent to
//!
//! ```text
//! max(A(p_d), B(p_d)) <= alpha <= C(p_d)
//! ```
//!
//! where `A` keeps the weak message decodable at the strong user, `B` keeps
//! the weak user's combined SINR above threshold and `C` protects the strong
//! user's own rate (see [`RegionBounds`]). At any relay power the sum rate is
//! non-increasing in `alpha`, so the optimum sits on the lower boundary and
//! the search collapses to one dimension in `p_d`:
//!
//! * HD: the boundary only improves with `p_d` until `B` meets `A`, which
//!   gives `p_d* = min(p_d_max, P_int)`.
//! * FD: below the `A`/`B` crossing `b2` the objective is quasi-convex in
//!   `p_d` and above it strictly decreasing, so the optimum is one of the
//!   two end points `0` and `min(p_d_max, b2)`.

mod bounds;
mod fd;
mod hd;
mod policy;

pub use bounds::RegionBounds;
pub use fd::{
    fd_breakpoint_power, fd_feas_params, fd_feasible, fd_fixed_relay, fd_optimal, FdCondition,
    FdFeasParams, FdFeasibility, FdViolation,
};
pub use hd::{
    hd_feasible, hd_fixed_relay, hd_intersection_power, hd_min_bs_power, hd_min_relay_power,
    hd_optimal, HdFeasibility,
};
pub use policy::{mode_select, noma_optimal, PairPolicy, RelayPower, Strategy};

use std::f64::consts::LN_2;
use std::fmt;

use thiserror::Error;

use crate::error::InputError;
use crate::rates::{PairChannels, PowerDecision, RatePair};

/// Slack allowed when checking the QoS of a returned solution. Absorbs
/// floating-point rounding only.
pub const QOS_EPS: f64 = 1e-9;

/// Per-user rate threshold and the SINR thresholds it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosSpec {
    r_th: f64,
    delta_hd: f64,
    delta_fd: f64,
}

impl QosSpec {
    pub fn new(r_th: f64) -> Result<Self, InputError> {
        if !(r_th.is_finite() && r_th >= 0.0) {
            return Err(InputError::RateThreshold(r_th));
        }
        Ok(Self {
            r_th,
            delta_hd: (2.0 * r_th * LN_2).exp_m1(),
            delta_fd: (r_th * LN_2).exp_m1(),
        })
    }

    pub fn r_th(&self) -> f64 {
        self.r_th
    }

    /// `2^(2 R_th) - 1`: half-duplex spends two slots per message.
    pub fn delta_hd(&self) -> f64 {
        self.delta_hd
    }

    /// `2^R_th - 1`.
    pub fn delta_fd(&self) -> f64 {
        self.delta_fd
    }
}

/// One pair's power-control problem: channels, budgets and QoS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairProblem {
    pub channels: PairChannels,
    pub p_bs: f64,
    pub p_d_max: f64,
    pub qos: QosSpec,
}

impl PairProblem {
    pub fn new(
        channels: PairChannels,
        p_bs: f64,
        p_d_max: f64,
        qos: QosSpec,
    ) -> Result<Self, InputError> {
        if !(p_bs.is_finite() && p_bs > 0.0) {
            return Err(InputError::BsPower(p_bs));
        }
        if !(p_d_max.is_finite() && p_d_max >= 0.0) {
            return Err(InputError::Power {
                name: "relay power budget",
                value: p_d_max,
            });
        }
        Ok(Self {
            channels,
            p_bs,
            p_d_max,
            qos,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelayMode {
    HalfDuplex,
    FullDuplex,
    /// No cooperation: plain NOMA, or a strong user served alone.
    Direct,
}

impl fmt::Display for RelayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelayMode::HalfDuplex => "HD",
            RelayMode::FullDuplex => "FD",
            RelayMode::Direct => "NOMA",
        })
    }
}

/// A feasible operating point of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSolution {
    pub mode: RelayMode,
    pub decision: PowerDecision,
    pub rates: RatePair,
    pub sum_rate: f64,
}

impl PairSolution {
    pub(crate) fn new(mode: RelayMode, decision: PowerDecision, rates: RatePair) -> Self {
        Self {
            mode,
            decision,
            rates,
            sum_rate: rates.sum(),
        }
    }

    /// Both users reach `r_th` up to [`QOS_EPS`].
    pub fn meets_qos(&self, r_th: f64) -> bool {
        self.rates.strong >= r_th - QOS_EPS && self.rates.weak >= r_th - QOS_EPS
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerError {
    #[error("strong user has zero direct gain and cannot meet a positive rate threshold")]
    ZeroStrongGain,
    #[error("HD pair infeasible: {0}")]
    HdInfeasible(HdFeasibility),
    #[error("FD pair infeasible: {0}")]
    FdInfeasible(FdViolation),
    #[error("NOMA pair infeasible: the weak user's minimum share exceeds what the strong user can give up")]
    NomaInfeasible,
    #[error("FD breakpoints undefined for this pair: {0}")]
    DegenerateFd(&'static str),
}

/// Clamp `alpha` into `[0, upper]` and build a decision.
fn boundary_decision(alpha: f64, upper: f64, p_d: f64) -> PowerDecision {
    let alpha = alpha.min(upper).clamp(0.0, 1.0);
    PowerDecision { alpha, p_d }
}
