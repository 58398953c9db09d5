//! Half-duplex feasibility and closed-form optimum.

use std::fmt;

use super::{boundary_decision, PairProblem, PairSolution, PowerError, RegionBounds, RelayMode};
use crate::rates::{hd_rates, PowerDecision};

/// Outcome of the HD feasibility test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdFeasibility {
    /// `p_bs` reaches [`hd_min_bs_power`].
    pub bs_budget: bool,
    /// `p_d_max` reaches `max(0, P_min)`.
    pub relay_budget: bool,
    pub min_bs_power: f64,
    /// `P_min` clamped below at zero.
    pub min_relay_power: f64,
}

impl HdFeasibility {
    pub fn is_feasible(&self) -> bool {
        self.bs_budget && self.relay_budget
    }
}

impl fmt::Display for HdFeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.bs_budget {
            parts.push(format!("BS budget below {:e}", self.min_bs_power));
        }
        if !self.relay_budget {
            parts.push(format!("relay budget below {:e}", self.min_relay_power));
        }
        if parts.is_empty() {
            f.write_str("feasible")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

/// Smallest BS power for which `A <= C`, i.e. `delta (delta + 2) / gm`.
///
/// Below it the strong user cannot both decode the weak message and meet
/// its own threshold, whatever the relay does.
pub fn hd_min_bs_power(problem: &PairProblem) -> f64 {
    let d = problem.qos.delta_hd();
    d * (d + 2.0) / problem.channels.strong()
}

/// Relay power `P_min` at which `B` meets `C`. Negative when the direct
/// link alone already satisfies the weak user at the strong user's limit.
/// Without a relay link this is `-inf` or `+inf` accordingly.
pub fn hd_min_relay_power(problem: &PairProblem) -> f64 {
    let ch = &problem.channels;
    let (gm, gn, gd) = (ch.strong(), ch.weak(), ch.d2d());
    let d = problem.qos.delta_hd();
    let p = problem.p_bs;
    let x_min = (d * (d + 1.0) * gn + d * gm - p * gn * gm) / (d * gn + gm);
    if gd > 0.0 {
        x_min / gd
    } else if x_min <= 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

/// Relay power `P_int` at which `B` meets `A`.
pub fn hd_intersection_power(problem: &PairProblem) -> f64 {
    RegionBounds::half_duplex(problem).crossing_power()
}

pub fn hd_feasible(problem: &PairProblem) -> Result<HdFeasibility, PowerError> {
    if problem.qos.delta_hd() == 0.0 {
        return Ok(HdFeasibility {
            bs_budget: true,
            relay_budget: true,
            min_bs_power: 0.0,
            min_relay_power: 0.0,
        });
    }
    if problem.channels.strong() == 0.0 {
        return Err(PowerError::ZeroStrongGain);
    }
    let min_bs_power = hd_min_bs_power(problem);
    let min_relay_power = hd_min_relay_power(problem).max(0.0);
    Ok(HdFeasibility {
        bs_budget: problem.p_bs >= min_bs_power,
        relay_budget: problem.p_d_max >= min_relay_power,
        min_bs_power,
        min_relay_power,
    })
}

/// Sum-rate maximizing HD operating point.
///
/// The relay transmits at `min(p_d_max, P_int)` and `alpha` sits on the
/// lower boundary `max(A, B)` there.
pub fn hd_optimal(problem: &PairProblem) -> Result<PairSolution, PowerError> {
    let feas = hd_feasible(problem)?;
    if !feas.is_feasible() {
        return Err(PowerError::HdInfeasible(feas));
    }
    let ch = &problem.channels;
    if problem.qos.delta_hd() == 0.0 {
        let dec = PowerDecision { alpha: 0.0, p_d: 0.0 };
        return Ok(PairSolution::new(RelayMode::HalfDuplex, dec, hd_rates(ch, dec, problem.p_bs)));
    }
    let bounds = RegionBounds::half_duplex(problem);
    let p_d = if ch.d2d() == 0.0 {
        0.0
    } else {
        problem.p_d_max.min(bounds.crossing_power())
    };
    let dec = boundary_decision(bounds.min_alpha(p_d), bounds.strong_qos(p_d), p_d);
    #[cfg(debug_assertions)]
    check_identities(problem, &bounds);
    Ok(PairSolution::new(RelayMode::HalfDuplex, dec, hd_rates(ch, dec, problem.p_bs)))
}

/// HD with the relay pinned at `p_d_max` and the smallest feasible `alpha`.
pub fn hd_fixed_relay(problem: &PairProblem) -> Option<PairSolution> {
    let ch = &problem.channels;
    let p_d = problem.p_d_max;
    if problem.qos.delta_hd() == 0.0 {
        let dec = PowerDecision { alpha: 0.0, p_d };
        return Some(PairSolution::new(RelayMode::HalfDuplex, dec, hd_rates(ch, dec, problem.p_bs)));
    }
    if ch.strong() == 0.0 {
        return None;
    }
    let bounds = RegionBounds::half_duplex(problem);
    let lo = bounds.min_alpha(p_d);
    let hi = bounds.strong_qos(p_d);
    if lo > hi {
        return None;
    }
    let dec = boundary_decision(lo, hi, p_d);
    Some(PairSolution::new(RelayMode::HalfDuplex, dec, hd_rates(ch, dec, problem.p_bs)))
}

#[cfg(debug_assertions)]
fn check_identities(problem: &PairProblem, bounds: &RegionBounds) {
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
    let p_int = bounds.crossing_power();
    if p_int.is_finite() && p_int > 0.0 {
        debug_assert!(rel(bounds.combining_raw(p_int), bounds.sic(p_int)));
    }
    let p_min = hd_min_relay_power(problem);
    if p_min.is_finite() && problem.channels.weak() > 0.0 {
        debug_assert!(rel(bounds.combining_raw(p_min), bounds.strong_qos(p_min)));
    }
}
