//! Full-duplex feasibility and closed-form optimum.

use std::fmt;

use super::{boundary_decision, PairProblem, PairSolution, PowerError, RegionBounds, RelayMode};
use crate::rates::{fd_rates, PowerDecision};

/// Breakpoints of the FD feasible region.
///
/// `b1 <= b3` are the roots of `B = C` (present iff `delta1 >= 0`); `C`
/// lies above `B` outside `(b1, b3)`. `b2` is where `B` meets `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdFeasParams {
    pub delta1: f64,
    pub delta2: f64,
    pub b1: Option<f64>,
    pub b2: f64,
    pub b3: Option<f64>,
}

/// Which branch of the FD feasibility test holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FdCondition {
    /// `delta1 >= 0`, `b1 < 0`, `b3 <= b2` and `p_d_max >= b3`.
    One,
    /// `delta1 >= 0` and `b1 >= 0`.
    Two,
    /// `delta1 < 0`.
    Three,
}

impl FdCondition {
    pub fn index(self) -> u8 {
        match self {
            FdCondition::One => 1,
            FdCondition::Two => 2,
            FdCondition::Three => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdViolation {
    /// The upper root of `B = C` lies past the `A`/`B` crossing.
    UpperRootPastCrossing { b2: f64, b3: f64 },
    /// The relay budget cannot reach the upper root of `B = C`.
    RelayBudget { b3: f64, p_d_max: f64 },
    /// No breakpoint form applies and the region misses the power box.
    EmptyRegion,
}

impl fmt::Display for FdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FdViolation::UpperRootPastCrossing { b2, b3 } => {
                write!(f, "condition 1 fails: b3 = {b3:e} exceeds b2 = {b2:e}")
            }
            FdViolation::RelayBudget { b3, p_d_max } => {
                write!(f, "condition 1 fails: relay budget {p_d_max:e} below b3 = {b3:e}")
            }
            FdViolation::EmptyRegion => f.write_str("no (alpha, p_d) meets both thresholds"),
        }
    }
}

/// Outcome of the FD feasibility test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdFeasibility {
    /// Zero rate threshold.
    Trivial,
    Condition(FdCondition),
    /// Breakpoints undefined (no SI, no relay link or no weak direct link);
    /// decided on the region boundary directly.
    Degenerate,
    Infeasible(FdViolation),
}

impl FdFeasibility {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, FdFeasibility::Infeasible(_))
    }

    pub fn condition(&self) -> Option<FdCondition> {
        match self {
            FdFeasibility::Condition(c) => Some(*c),
            _ => None,
        }
    }
}

pub fn fd_feas_params(problem: &PairProblem) -> Result<FdFeasParams, PowerError> {
    let ch = &problem.channels;
    if problem.qos.delta_fd() == 0.0 {
        return Err(PowerError::DegenerateFd("zero rate threshold"));
    }
    if ch.strong() == 0.0 {
        return Err(PowerError::ZeroStrongGain);
    }
    if ch.si() == 0.0 {
        return Err(PowerError::DegenerateFd("zero self-interference gain"));
    }
    if ch.d2d() == 0.0 {
        return Err(PowerError::DegenerateFd("zero D2D gain"));
    }
    if ch.weak() == 0.0 {
        return Err(PowerError::DegenerateFd("zero weak-user gain"));
    }
    let bounds = RegionBounds::full_duplex(problem);
    let [a0, a1, a2] = bounds.upper_quadratic();
    let delta1 = a1 * a1 - 4.0 * a2 * a0;
    let (b1, b3) = if delta1 >= 0.0 {
        let q = -0.5 * (a1 + a1.signum() * delta1.sqrt());
        let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a2, a0 / q) };
        (Some(r1.min(r2)), Some(r1.max(r2)))
    } else {
        (None, None)
    };
    let [c, l, a] = bounds.crossing_quadratic();
    Ok(FdFeasParams {
        delta1,
        delta2: l * l - 4.0 * a * c,
        b1,
        b2: bounds.crossing_power(),
        b3,
    })
}

pub fn fd_feasible(problem: &PairProblem) -> Result<FdFeasibility, PowerError> {
    if problem.qos.delta_fd() == 0.0 {
        return Ok(FdFeasibility::Trivial);
    }
    let params = match fd_feas_params(problem) {
        Ok(params) => params,
        Err(PowerError::DegenerateFd(_)) => {
            let bounds = RegionBounds::full_duplex(problem);
            let p_d = best_relay_power(&bounds, problem.p_d_max);
            return Ok(if bounds.headroom(p_d) >= bounds.headroom_threshold() {
                FdFeasibility::Degenerate
            } else {
                FdFeasibility::Infeasible(FdViolation::EmptyRegion)
            });
        }
        Err(e) => return Err(e),
    };
    Ok(match (params.b1, params.b3) {
        (Some(b1), Some(b3)) if b1 < 0.0 => {
            if b3 > params.b2 {
                FdFeasibility::Infeasible(FdViolation::UpperRootPastCrossing { b2: params.b2, b3 })
            } else if problem.p_d_max < b3 {
                FdFeasibility::Infeasible(FdViolation::RelayBudget {
                    b3,
                    p_d_max: problem.p_d_max,
                })
            } else {
                FdFeasibility::Condition(FdCondition::One)
            }
        }
        (Some(_), Some(_)) => FdFeasibility::Condition(FdCondition::Two),
        _ => FdFeasibility::Condition(FdCondition::Three),
    })
}

/// The nonzero relay-power candidate `min(p_d_max, b2)`.
pub fn fd_breakpoint_power(problem: &PairProblem) -> f64 {
    problem
        .p_d_max
        .min(RegionBounds::full_duplex(problem).crossing_power())
}

/// Of `0` and `min(p_d_max, b2)`, the relay power with more headroom on the
/// lower boundary; ties go to the smaller power.
fn best_relay_power(bounds: &RegionBounds, p_d_max: f64) -> f64 {
    let hi = p_d_max.min(bounds.crossing_power());
    if bounds.headroom(hi) > bounds.headroom(0.0) {
        hi
    } else {
        0.0
    }
}

/// Sum-rate maximizing FD operating point.
///
/// Below `b2` the boundary headroom is quasi-convex in `p_d` and beyond
/// `b2` it decreases, so the best relay power is `0` or
/// `min(p_d_max, b2)`. `alpha` then sits on `max(A, B)`, which equals `A`
/// at `b2`.
pub fn fd_optimal(problem: &PairProblem) -> Result<PairSolution, PowerError> {
    let feas = fd_feasible(problem)?;
    if let FdFeasibility::Infeasible(v) = feas {
        return Err(PowerError::FdInfeasible(v));
    }
    let ch = &problem.channels;
    if feas == FdFeasibility::Trivial {
        let dec = PowerDecision { alpha: 0.0, p_d: 0.0 };
        return Ok(PairSolution::new(RelayMode::FullDuplex, dec, fd_rates(ch, dec, problem.p_bs)));
    }
    let bounds = RegionBounds::full_duplex(problem);
    let p_d = best_relay_power(&bounds, problem.p_d_max);
    let dec = boundary_decision(bounds.min_alpha(p_d), bounds.strong_qos(p_d), p_d);
    #[cfg(debug_assertions)]
    check_identities(problem, &bounds);
    Ok(PairSolution::new(RelayMode::FullDuplex, dec, fd_rates(ch, dec, problem.p_bs)))
}

/// FD with the relay pinned at `p_d_max` and the smallest feasible `alpha`.
pub fn fd_fixed_relay(problem: &PairProblem) -> Option<PairSolution> {
    let ch = &problem.channels;
    let p_d = problem.p_d_max;
    if problem.qos.delta_fd() == 0.0 {
        let dec = PowerDecision { alpha: 0.0, p_d };
        return Some(PairSolution::new(RelayMode::FullDuplex, dec, fd_rates(ch, dec, problem.p_bs)));
    }
    if ch.strong() == 0.0 {
        return None;
    }
    let bounds = RegionBounds::full_duplex(problem);
    let lo = bounds.min_alpha(p_d);
    let hi = bounds.strong_qos(p_d);
    if lo > hi {
        return None;
    }
    let dec = boundary_decision(lo, hi, p_d);
    Some(PairSolution::new(RelayMode::FullDuplex, dec, fd_rates(ch, dec, problem.p_bs)))
}

#[cfg(debug_assertions)]
fn check_identities(problem: &PairProblem, bounds: &RegionBounds) {
    let Ok(params) = fd_feas_params(problem) else {
        return;
    };
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
    if params.b2 > 0.0 && params.b2.is_finite() {
        debug_assert!(rel(bounds.sic(params.b2), bounds.combining_raw(params.b2)));
    }
    for b in [params.b1, params.b3].into_iter().flatten() {
        debug_assert!(rel(bounds.combining_raw(b), bounds.strong_qos(b)));
    }
}
