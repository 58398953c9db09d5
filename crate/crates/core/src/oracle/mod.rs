//! Brute-force references: a grid search over the `(alpha, p_d)` box and
//! exhaustive enumeration of pairings.
//!
//! The grid and the enumeration never use the closed-form machinery of
//! [`crate::power_control`]; the grid only evaluates rates and QoS point by
//! point. [`verify`] puts the two side by side on random instances.

use rayon::prelude::*;
use thiserror::Error;

use crate::assignment::Assignment;
use crate::power_control::{PairProblem, PairSolution, RelayMode};
use crate::rates::{fd_rates, hd_rates, PowerDecision};

pub mod verify;

/// Largest `K` accepted by [`exhaustive_pairing`].
pub const MAX_EXHAUSTIVE_K: usize = 9;

/// Base-grid nodes on each side of the incumbent spanned by the first
/// refinement window.
const BASE_BRACKET: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("exhaustive pairing limited to K <= {MAX_EXHAUSTIVE_K}, got {0}")]
    TooLarge(usize),
    #[error("grid needs at least 2 points per axis and shrink in (0, 1)")]
    BadGrid,
    #[error("rate matrix must be {0} x {0} with finite or -inf entries")]
    BadMatrix(usize),
}

/// Resolution of [`grid_optimal`].
///
/// The base grid mixes uniform and geometric spacing on both axes so that
/// optima squeezed against `alpha = 0`, `alpha = 1` or `p_d = 0` are still
/// resolved. Every `p_d` column is searched over the whole `alpha` axis and
/// its best node polished by two `refine_points` rescans between its
/// neighbours. Each refinement round then lays `refine_points` columns over
/// a `p_d` window around the incumbent: the first window reaches six base
/// nodes either way, later ones are `refine_shrink` times the previous
/// width on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub alpha_points: usize,
    pub pd_points: usize,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
    pub refine_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            alpha_points: 2001,
            pd_points: 2001,
            refine_rounds: 3,
            refine_shrink: 0.05,
            refine_points: 201,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), OracleError> {
        let ok = self.alpha_points >= 2
            && self.pd_points >= 2
            && self.refine_points >= 2
            && self.refine_shrink > 0.0
            && self.refine_shrink < 1.0;
        if ok {
            Ok(())
        } else {
            Err(OracleError::BadGrid)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridMode {
    HalfDuplex,
    FullDuplex,
}

/// An `alpha` node stored together with `1 - alpha`, so that points close
/// to `alpha = 1` keep their precision on the strong user's side.
#[derive(Debug, Clone, Copy, PartialEq)]
struct AlphaNode {
    alpha: f64,
    beta: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

fn geomspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    linspace(a, b, n).map(f64::exp)
}

fn alpha_axis(n: usize) -> Vec<AlphaNode> {
    let mut nodes: Vec<AlphaNode> = linspace(0.0, 1.0, (n / 2).max(2))
        .map(|a| AlphaNode { alpha: a, beta: 1.0 - a })
        .chain(geomspace(1e-10, 1.0, n / 4).map(|a| AlphaNode { alpha: a, beta: 1.0 - a }))
        .chain(geomspace(1e-10, 1.0, n / 4).map(|b| AlphaNode { alpha: 1.0 - b, beta: b }))
        .collect();
    nodes.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then(y.beta.total_cmp(&x.beta)));
    nodes.dedup_by(|x, y| x.alpha == y.alpha);
    nodes
}

fn pd_axis(n: usize, p_max: f64) -> Vec<f64> {
    if p_max == 0.0 {
        return vec![0.0];
    }
    let mut nodes: Vec<f64> = std::iter::once(0.0)
        .chain(linspace(0.0, p_max, (n / 2).max(2)))
        .chain(geomspace(p_max * 1e-10, p_max, n / 2))
        .map(|p| p.min(p_max))
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Product-form evaluation of one pair, constants hoisted.
struct Kernel {
    pgm: f64,
    pgn: f64,
    gd: f64,
    gsi: f64,
    delta: f64,
}

impl Kernel {
    /// `(1 + SINR_strong)(1 + SINR_weak)` when both users meet `delta`,
    /// otherwise `None`.
    #[inline(always)]
    fn value(&self, a: AlphaNode, direct_weak: f64, p: f64) -> Option<f64> {
        let q = self.gsi * p + 1.0;
        let strong_sig = a.beta * self.pgm;
        let t = strong_sig + q;
        let relay_sig = a.alpha * self.pgm;
        let mrc = direct_weak + self.gd * p;
        let ok = strong_sig >= self.delta * q && relay_sig >= self.delta * t && mrc >= self.delta;
        if !ok {
            return None;
        }
        // Weak rate is limited by the relay's decoding iff relay_sig / t <= mrc.
        let num = if relay_sig <= mrc * t {
            self.pgm + q
        } else {
            t * (1.0 + mrc)
        };
        Some(num / q)
    }

    /// Largest relative shortfall against `delta` over the three SINRs.
    fn violation(&self, a: AlphaNode, direct_weak: f64, p: f64) -> f64 {
        let q = self.gsi * p + 1.0;
        let strong = a.beta * self.pgm / q;
        let relay = a.alpha * self.pgm / (a.beta * self.pgm + q);
        let mrc = direct_weak + self.gd * p;
        let worst = strong.min(relay).min(mrc);
        ((self.delta - worst) / self.delta).max(0.0)
    }

    fn direct_weak(&self, a: AlphaNode) -> f64 {
        a.alpha * self.pgn / (a.beta * self.pgn + 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    /// Objective for feasible points, minus the violation otherwise.
    score: f64,
    feasible: bool,
    a: AlphaNode,
    p: f64,
    /// Base-grid indices the point was found at or next to.
    ia: usize,
    ip: usize,
}

impl Best {
    /// Feasible beats infeasible, then higher score, then lower `(alpha, p_d)`.
    fn better(self, other: Best) -> Best {
        if other.feasible != self.feasible {
            return if other.feasible { other } else { self };
        }
        let lower = (other.a.alpha, other.p) < (self.a.alpha, self.p);
        if other.score > self.score || (other.score == self.score && lower) {
            other
        } else {
            self
        }
    }
}

/// Uniform nodes between two `alpha` nodes, spaced in `1 - alpha` when
/// that side is the closer bound so it keeps full precision.
fn alpha_window(lo: AlphaNode, hi: AlphaNode, n: usize) -> Vec<AlphaNode> {
    let mut nodes: Vec<AlphaNode> = if lo.alpha > 0.5 {
        let mut v: Vec<AlphaNode> = linspace(hi.beta, lo.beta, n)
            .map(|b| AlphaNode { alpha: 1.0 - b, beta: b })
            .collect();
        v.reverse();
        v
    } else {
        linspace(lo.alpha, hi.alpha, n)
            .map(|a| AlphaNode { alpha: a, beta: 1.0 - a })
            .collect()
    };
    nodes.dedup_by(|x, y| x.alpha == y.alpha);
    nodes
}

/// Best feasible `alpha` node in one `p_d` column, by score then lower
/// `alpha`.
fn column_best(kernel: &Kernel, alphas: &[AlphaNode], dws: &[f64], p: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (ia, (&a, &dw)) in alphas.iter().zip(dws).enumerate() {
        if let Some(v) = kernel.value(a, dw, p) {
            if best.map_or(true, |(b, _)| v > b) {
                best = Some((v, ia));
            }
        }
    }
    best
}

/// Rescan `alpha` between the neighbours of the column's best node, twice,
/// so that columns are ranked by an accurate column optimum rather than by
/// how close the boundary happens to pass to a node.
fn polish_column(
    kernel: &Kernel,
    alphas: &[AlphaNode],
    ia: usize,
    score: f64,
    p: f64,
    points: usize,
) -> (f64, AlphaNode) {
    let mut best = (score, alphas[ia]);
    let mut nodes = alphas;
    let mut idx = ia;
    let mut owned;
    for _ in 0..2 {
        let lo = nodes[idx.saturating_sub(1)];
        let hi = nodes[(idx + 1).min(nodes.len() - 1)];
        owned = alpha_window(lo, hi, points);
        let dws: Vec<f64> = owned.iter().map(|&a| kernel.direct_weak(a)).collect();
        let Some((v, i)) = column_best(kernel, &owned, &dws, p) else {
            break;
        };
        if v > best.0 || (v == best.0 && owned[i].alpha < best.1.alpha) {
            best = (v, owned[i]);
        }
        nodes = &owned;
        idx = i;
    }
    best
}

/// Rescan `alpha` around the least-violating node of a column with no
/// feasible node, twice, recentring on the least violation. Catches feasible
/// slivers narrower than the node spacing.
fn rescue_column(kernel: &Kernel, alphas: &[AlphaNode], ia: usize, p: f64, points: usize) -> Option<(f64, AlphaNode)> {
    let mut nodes = alphas.to_vec();
    let mut idx = ia;
    for _ in 0..2 {
        let lo = nodes[idx.saturating_sub(1)];
        let hi = nodes[(idx + 1).min(nodes.len() - 1)];
        nodes = alpha_window(lo, hi, points);
        let dws: Vec<f64> = nodes.iter().map(|&a| kernel.direct_weak(a)).collect();
        if let Some((score, i)) = column_best(kernel, &nodes, &dws, p) {
            return Some(polish_column(kernel, &nodes, i, score, p, points));
        }
        idx = (0..nodes.len())
            .min_by(|&x, &y| {
                let vx = kernel.violation(nodes[x], dws[x], p);
                let vy = kernel.violation(nodes[y], dws[y], p);
                vx.total_cmp(&vy)
            })
            .unwrap();
    }
    None
}

/// Exhaustive scan of `alphas x pds`. Feasible points are ranked by the
/// objective with each column polished in `alpha`; if none is feasible,
/// every column is rescued around its least-violating node and, failing
/// that, points are ranked by their QoS violation instead.
fn scan(kernel: &Kernel, alphas: &[AlphaNode], pds: &[f64], polish_points: usize) -> Option<Best> {
    let dws: Vec<f64> = alphas.iter().map(|&a| kernel.direct_weak(a)).collect();
    let feasible = pds
        .par_iter()
        .enumerate()
        .with_min_len(16)
        .filter_map(|(ip, &p)| {
            let (score, ia) = column_best(kernel, alphas, &dws, p)?;
            let (score, a) = polish_column(kernel, alphas, ia, score, p, polish_points);
            Some(Best {
                score,
                feasible: true,
                a,
                p,
                ia,
                ip,
            })
        })
        .reduce_with(Best::better);
    feasible.or_else(|| {
        pds.par_iter()
            .enumerate()
            .with_min_len(16)
            .map(|(ip, &p)| {
                let mut best = Best {
                    score: f64::NEG_INFINITY,
                    feasible: false,
                    a: alphas[0],
                    p,
                    ia: 0,
                    ip,
                };
                for (ia, (&a, &dw)) in alphas.iter().zip(&dws).enumerate() {
                    let v = -kernel.violation(a, dw, p);
                    if v > best.score {
                        best.score = v;
                        best.a = a;
                        best.ia = ia;
                    }
                }
                if let Some((score, a)) = rescue_column(kernel, alphas, best.ia, p, polish_points) {
                    best.score = score;
                    best.a = a;
                    best.feasible = true;
                }
                best
            })
            .reduce_with(Best::better)
    })
}

/// Best grid point of one pair's power-control problem, `None` if no
/// scanned point meets both thresholds.
pub fn grid_optimal(problem: &PairProblem, mode: GridMode, spec: &GridSpec) -> Option<PairSolution> {
    spec.validate().expect("invalid GridSpec");
    let ch = &problem.channels;
    let p_max = problem.p_d_max;
    let (gsi, delta) = match mode {
        GridMode::HalfDuplex => (0.0, problem.qos.delta_hd()),
        GridMode::FullDuplex => (ch.si(), problem.qos.delta_fd()),
    };
    let kernel = Kernel {
        pgm: problem.p_bs * ch.strong(),
        pgn: problem.p_bs * ch.weak(),
        gd: ch.d2d(),
        gsi,
        delta,
    };
    let polish = spec.refine_points;

    let alphas = alpha_axis(spec.alpha_points);
    let pds = pd_axis(spec.pd_points, p_max);
    let mut best = scan(&kernel, &alphas, &pds, polish)?;

    // Columns are already optimal in alpha, so refinement narrows p_d only:
    // first to the neighbouring base nodes, then by `refine_shrink`.
    let mut p_lo = pds[best.ip.saturating_sub(BASE_BRACKET)];
    let mut p_hi = pds[(best.ip + BASE_BRACKET).min(pds.len() - 1)];
    for round in 0..spec.refine_rounds {
        if round > 0 {
            let pw = spec.refine_shrink * (p_hi - p_lo);
            p_lo = (best.p - pw).max(0.0);
            p_hi = (best.p + pw).min(p_max);
        }
        if p_hi <= p_lo {
            break;
        }
        let pds: Vec<f64> = linspace(p_lo, p_hi, spec.refine_points).collect();
        let Some(local) = scan(&kernel, &alphas, &pds, polish) else {
            continue;
        };
        let improves = (local.feasible && !best.feasible)
            || (local.feasible == best.feasible && local.score > best.score);
        if improves {
            best = local;
        }
    }

    if !best.feasible {
        return None;
    }
    let dec = PowerDecision {
        alpha: best.a.alpha,
        p_d: best.p,
    };
    Some(match mode {
        GridMode::HalfDuplex => {
            PairSolution::new(RelayMode::HalfDuplex, dec, hd_rates(ch, dec, problem.p_bs))
        }
        GridMode::FullDuplex => {
            PairSolution::new(RelayMode::FullDuplex, dec, fd_rates(ch, dec, problem.p_bs))
        }
    })
}

/// Best pairing by trying all `K!` permutations of a `K x K` rate matrix
/// (row-major, strong user by weak user; `-inf` marks an infeasible pair).
///
/// `Ok(None)` when every permutation uses an infeasible pair. Among equal
/// totals the lexicographically first permutation wins.
pub fn exhaustive_pairing(k: usize, rates: &[f64]) -> Result<Option<Assignment>, OracleError> {
    if k > MAX_EXHAUSTIVE_K {
        return Err(OracleError::TooLarge(k));
    }
    if rates.len() != k * k || rates.iter().any(|r| r.is_nan() || *r == f64::INFINITY) {
        return Err(OracleError::BadMatrix(k));
    }
    struct Search<'a> {
        k: usize,
        rates: &'a [f64],
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<Assignment>,
    }
    impl Search<'_> {
        fn go(&mut self, row: usize, acc: f64) {
            if row == self.k {
                if self.best.as_ref().map_or(true, |b| acc > b.total_rate) {
                    self.best = Some(Assignment {
                        pairing: self.current.clone(),
                        total_rate: acc,
                    });
                }
                return;
            }
            for col in 0..self.k {
                let r = self.rates[row * self.k + col];
                if self.used[col] || r == f64::NEG_INFINITY {
                    continue;
                }
                self.used[col] = true;
                self.current.push(col);
                self.go(row + 1, acc + r);
                self.current.pop();
                self.used[col] = false;
            }
        }
    }
    let mut s = Search {
        k,
        rates,
        used: vec![false; k],
        current: Vec::with_capacity(k),
        best: None,
    };
    if k == 0 {
        return Ok(Some(Assignment {
            pairing: Vec::new(),
            total_rate: 0.0,
        }));
    }
    // Matches the row-order summation of the matching routine.
    s.go(0, -0.0);
    Ok(s.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{hungarian, CostMatrix};
    use crate::power_control::QosSpec;
    use crate::rates::PairChannels;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(gm: f64, gn: f64, gd: f64, gsi: f64, p_bs: f64, p_d_max: f64, r_th: f64) -> PairProblem {
        let ch = PairChannels::new(gm, gn, gd, gsi).unwrap();
        PairProblem::new(ch, p_bs, p_d_max, QosSpec::new(r_th).unwrap()).unwrap()
    }

    fn small() -> GridSpec {
        GridSpec {
            alpha_points: 401,
            pd_points: 401,
            ..GridSpec::default()
        }
    }

    #[test]
    fn axes_are_sorted_and_bounded() {
        let a = alpha_axis(2001);
        assert!(a.windows(2).all(|w| w[0].alpha < w[1].alpha));
        assert_eq!(a[0].alpha, 0.0);
        assert_eq!(a.last().unwrap().alpha, 1.0);
        assert!(a.iter().all(|n| (n.alpha + n.beta - 1.0).abs() < 1e-15));
        let p = pd_axis(2001, 7.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((p[0], *p.last().unwrap()), (0.0, 7.0));
        assert_eq!(pd_axis(11, 0.0), vec![0.0]);
    }

    #[test]
    fn zero_threshold_optimum_is_a_node() {
        // r_th = 0: the strong user takes all power and the relay is idle.
        let pr = problem(3.0, 0.5, 0.0, 0.0, 10.0, 5.0, 0.0);
        let sol = grid_optimal(&pr, GridMode::FullDuplex, &small()).unwrap();
        assert_eq!(sol.decision, PowerDecision { alpha: 0.0, p_d: 0.0 });
        let closed = crate::power_control::fd_optimal(&pr).unwrap();
        assert_eq!(sol, closed);
    }

    #[test]
    fn kernel_agrees_with_rates() {
        let pr = problem(2.0, 0.2, 1.0, 0.05, 10.0, 5.0, 0.1);
        let k = Kernel {
            pgm: 20.0,
            pgn: 2.0,
            gd: 1.0,
            gsi: 0.05,
            delta: pr.qos.delta_fd(),
        };
        let a = AlphaNode { alpha: 0.4, beta: 0.6 };
        let v = k.value(a, k.direct_weak(a), 3.0).unwrap();
        let r = fd_rates(&pr.channels, PowerDecision { alpha: 0.4, p_d: 3.0 }, 10.0);
        assert!((v.log2() - r.sum()).abs() < 1e-12);
    }

    #[test]
    fn infeasible_returns_none() {
        // HD needs p_bs gm >= 15 at r_th = 1.
        let pr = problem(1.0, 0.5, 1.0, 0.0, 10.0, 5.0, 1.0);
        assert!(grid_optimal(&pr, GridMode::HalfDuplex, &small()).is_none());
    }

    #[test]
    fn grid_solutions_meet_qos() {
        let pr = problem(5.0, 0.1, 0.8, 0.01, 40.0, 2.0, 1.0);
        for mode in [GridMode::HalfDuplex, GridMode::FullDuplex] {
            let sol = grid_optimal(&pr, mode, &small()).unwrap();
            assert!(sol.meets_qos(1.0));
        }
    }

    #[test]
    fn exhaustive_basics() {
        let a = exhaustive_pairing(1, &[2.0]).unwrap().unwrap();
        assert_eq!((a.pairing, a.total_rate), (vec![0], 2.0));
        let d = [9.0, 1.0, 2.0, 1.0, 8.0, 1.0, 3.0, 2.0, 7.0];
        assert_eq!(exhaustive_pairing(3, &d).unwrap().unwrap().pairing, vec![0, 1, 2]);
        let ninf = f64::NEG_INFINITY;
        assert_eq!(exhaustive_pairing(2, &[ninf, 1.0, ninf, 2.0]).unwrap(), None);
        assert_eq!(exhaustive_pairing(10, &[0.0; 100]), Err(OracleError::TooLarge(10)));
    }

    #[test]
    fn exhaustive_equals_hungarian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let rates: Vec<f64> = (0..36)
                .map(|_| {
                    if rng.gen::<f64>() < 0.2 {
                        f64::NEG_INFINITY
                    } else {
                        rng.gen_range(0.0..10.0)
                    }
                })
                .collect();
            let opt = exhaustive_pairing(6, &rates).unwrap();
            let costs: Vec<Option<f64>> = rates.iter().map(|&r| (r > f64::NEG_INFINITY).then_some(r)).collect();
            let hung = hungarian(&CostMatrix::from_rates(6, &costs).unwrap());
            match (opt, hung) {
                (Some(o), Ok(h)) => {
                    assert_eq!(o.total_rate, h.total_rate);
                    for _ in 0..100 {
                        let mut perm: Vec<usize> = (0..6).collect();
                        for i in (1..6).rev() {
                            perm.swap(i, rng.gen_range(0..=i));
                        }
                        let t: f64 = perm.iter().enumerate().map(|(m, &n)| rates[m * 6 + n]).sum();
                        assert!(o.total_rate >= t);
                    }
                }
                (None, Err(_)) => {}
                other => panic!("{other:?}"),
            }
        }
    }
}
