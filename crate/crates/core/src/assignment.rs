//! Optimal strong/weak pairing by minimum-cost perfect matching.
//!
//! Every candidate pair is solved on its own and its optimal sum rate
//! becomes a (negated) assignment cost; infeasible pairs carry `+inf` and
//! are simply never used as edges.

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::NetworkRealization;
use crate::error::InputError;
use crate::power_control::{PairPolicy, PairProblem, PairSolution, QosSpec, RelayMode};
use crate::rates::{capacity, PowerDecision, RatePair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("infeasible network: no perfect matching covers strong users {unmatched:?}")]
    Infeasible { unmatched: Vec<usize> },
    #[error(transparent)]
    Input(#[from] InputError),
}

/// Square cost matrix; `+inf` marks a forbidden pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Row-major `k x k` costs. Entries must be finite or `+inf`.
    pub fn new(k: usize, entries: Vec<f64>) -> Result<Self, InputError> {
        if entries.len() != k * k {
            return Err(InputError::Shape(format!(
                "{k} x {k} cost matrix needs {} entries, got {}",
                k * k,
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|c| c.is_nan() || **c == f64::NEG_INFINITY) {
            return Err(InputError::Shape(format!("cost entries must be finite or +inf, got {bad}")));
        }
        Ok(Self { k, entries })
    }

    /// Costs `-rate`, with `None` (infeasible) mapped to `+inf`.
    pub fn from_rates(k: usize, rates: &[Option<f64>]) -> Result<Self, InputError> {
        let entries = rates
            .iter()
            .map(|r| r.map_or(f64::INFINITY, |r| -r))
            .collect();
        Self::new(k, entries)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.k + col]
    }
}

/// A perfect matching of strong users to weak users.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `pairing[m]` is the weak user matched with strong user `m`.
    pub pairing: Vec<usize>,
    /// Sum of `-cost` over matched pairs, in row order.
    pub total_rate: f64,
}

/// Minimum-cost perfect matching (shortest augmenting paths with
/// potentials, `O(K^3)`).
pub fn hungarian(cost: &CostMatrix) -> Result<Assignment, AssignmentError> {
    let n = cost.k();
    if n == 0 {
        return Ok(Assignment {
            pairing: Vec::new(),
            total_rate: 0.0,
        });
    }
    let inf = f64::INFINITY;
    // 1-based: row/col 0 is the virtual root of each search tree.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        minv.fill(inf);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let c = cost.get(i0 - 1, j - 1);
                if c < inf {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if delta == inf {
                return Err(AssignmentError::Infeasible {
                    unmatched: unmatched_rows(cost),
                });
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairing = vec![0; n];
    for j in 1..=n {
        pairing[col_row[j] - 1] = j - 1;
    }
    let total_rate = pairing
        .iter()
        .enumerate()
        .map(|(m, &w)| -cost.get(m, w))
        .sum();
    Ok(Assignment {
        pairing,
        total_rate,
    })
}

/// Rows left uncovered by a maximum matching over the finite entries.
fn unmatched_rows(cost: &CostMatrix) -> Vec<usize> {
    let n = cost.k();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        cost: &CostMatrix,
        row: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..cost.k() {
            if cost.get(row, col) == f64::INFINITY || seen[col] {
                continue;
            }
            seen[col] = true;
            if owner[col].map_or(true, |r| augment(cost, r, seen, owner)) {
                owner[col] = Some(row);
                return true;
            }
        }
        false
    }
    (0..n)
        .filter(|&row| !augment(cost, row, &mut vec![false; n], &mut owner))
        .collect()
}

/// Budgets, QoS and per-pair policy of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub p_bs: f64,
    pub p_d_max: f64,
    pub qos: QosSpec,
    pub policy: PairPolicy,
}

impl SystemConfig {
    pub fn new(p_bs: f64, p_d_max: f64, qos: QosSpec, policy: PairPolicy) -> Result<Self, InputError> {
        // PairProblem owns the budget checks.
        let probe = crate::rates::PairChannels::new(1.0, 1.0, 0.0, 0.0)?;
        PairProblem::new(probe, p_bs, p_d_max, qos)?;
        Ok(Self {
            p_bs,
            p_d_max,
            qos,
            policy,
        })
    }

    /// Optimal operation of strong user `m` with weak user `n`.
    ///
    /// A virtual weak user leaves the strong user alone on the subchannel.
    pub fn solve_pair(&self, net: &NetworkRealization, m: usize, n: usize) -> Option<PairSolution> {
        if net.is_virtual(n) {
            let strong = capacity(self.p_bs * net.strong_gain(m));
            if strong < self.qos.r_th() {
                return None;
            }
            let rates = RatePair { strong, weak: 0.0 };
            return Some(PairSolution {
                mode: RelayMode::Direct,
                decision: PowerDecision { alpha: 0.0, p_d: 0.0 },
                rates,
                sum_rate: strong,
            });
        }
        let problem = PairProblem {
            channels: net.pair(m, n),
            p_bs: self.p_bs,
            p_d_max: self.p_d_max,
            qos: self.qos,
        };
        self.policy.solve(&problem)
    }
}

/// Per-pair optimal solutions for every `(strong m, weak n)`, row-major.
pub fn pair_table(net: &NetworkRealization, config: &SystemConfig) -> Vec<Option<PairSolution>> {
    let k = net.k();
    (0..k * k)
        .into_par_iter()
        .map(|i| config.solve_pair(net, i / k, i % k))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub assignment: Assignment,
    /// Solution of each matched pair, indexed by strong user.
    pub pairs: Vec<PairSolution>,
}

/// Optimal pairing and power control of a whole network.
pub fn solve_network(
    net: &NetworkRealization,
    config: &SystemConfig,
) -> Result<NetworkSolution, AssignmentError> {
    let table = pair_table(net, config);
    solve_table(net.k(), &table)
}

/// Matching step on an already filled pair table.
pub fn solve_table(
    k: usize,
    table: &[Option<PairSolution>],
) -> Result<NetworkSolution, AssignmentError> {
    let rates: Vec<Option<f64>> = table.iter().map(|s| s.map(|s| s.sum_rate)).collect();
    let assignment = hungarian(&CostMatrix::from_rates(k, &rates)?)?;
    let pairs = assignment
        .pairing
        .iter()
        .enumerate()
        .map(|(m, &n)| table[m * k + n].expect("matching uses feasible pairs only"))
        .collect();
    Ok(NetworkSolution { assignment, pairs })
}

/// Total rate of a fixed pairing, `None` if any of its pairs is infeasible.
pub fn pairing_total(k: usize, table: &[Option<PairSolution>], pairing: &[usize]) -> Option<f64> {
    pairing
        .iter()
        .enumerate()
        .map(|(m, &n)| table[m * k + n].map(|s| s.sum_rate))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_trial, ChannelStats};
    use crate::power_control::{RelayPower, Strategy};
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    const INF: f64 = f64::INFINITY;

    fn brute(cost: &CostMatrix) -> Option<f64> {
        fn rec(cost: &CostMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
            if row == cost.k() {
                if best.map_or(true, |b| acc < b) {
                    *best = Some(acc);
                }
                return;
            }
            for c in 0..cost.k() {
                if !used[c] && cost.get(row, c) < INF {
                    used[c] = true;
                    rec(cost, row + 1, used, acc + cost.get(row, c), best);
                    used[c] = false;
                }
            }
        }
        let mut best = None;
        rec(cost, 0, &mut vec![false; cost.k()], 0.0, &mut best);
        best
    }

    #[test]
    fn single_entry() {
        let a = hungarian(&CostMatrix::new(1, vec![-2.5]).unwrap()).unwrap();
        assert_eq!(a.pairing, vec![0]);
        assert_eq!(a.total_rate, 2.5);
    }

    #[test]
    fn dominant_diagonal() {
        let c = CostMatrix::new(3, vec![-9.0, -1.0, -2.0, -1.0, -8.0, -1.0, -3.0, -2.0, -7.0]).unwrap();
        assert_eq!(hungarian(&c).unwrap().pairing, vec![0, 1, 2]);
    }

    #[test]
    fn forced_anti_diagonal() {
        let c = CostMatrix::new(2, vec![INF, -1.0, -2.0, INF]).unwrap();
        let a = hungarian(&c).unwrap();
        assert_eq!(a.pairing, vec![1, 0]);
        assert_eq!(a.total_rate, 3.0);
    }

    #[test]
    fn infeasible_lists_rows() {
        // Rows 0 and 1 both only reach column 0.
        let c = CostMatrix::new(3, vec![-1.0, INF, INF, -1.0, INF, INF, -1.0, -1.0, -1.0]).unwrap();
        match hungarian(&c) {
            Err(AssignmentError::Infeasible { unmatched }) => assert_eq!(unmatched.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(CostMatrix::new(1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::new(1, vec![f64::NEG_INFINITY]).is_err());
        assert!(CostMatrix::new(2, vec![1.0]).is_err());
    }

    fn matrix() -> impl proptest::strategy::Strategy<Value = CostMatrix> {
        (1usize..=6).prop_flat_map(|k| {
            prop::collection::vec(prop_oneof![4 => -10.0f64..10.0, 1 => Just(INF)], k * k)
                .prop_map(move |e| CostMatrix::new(k, e).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(c in matrix()) {
            let best = brute(&c);
            match hungarian(&c) {
                Ok(a) => {
                    let mut seen = a.pairing.clone();
                    seen.sort();
                    prop_assert_eq!(seen, (0..c.k()).collect::<Vec<_>>());
                    let cost: f64 = a.pairing.iter().enumerate().map(|(m, &n)| c.get(m, n)).sum();
                    prop_assert!((cost - best.unwrap()).abs() < 1e-9);
                }
                Err(_) => prop_assert!(best.is_none()),
            }
        }

        #[test]
        fn shift_and_scale_keep_the_argmin(c in matrix(), shift in -5.0f64..5.0, scale in 0.1f64..10.0) {
            prop_assume!(brute(&c).is_some());
            let base = hungarian(&c).unwrap();
            let moved = |f: &dyn Fn(f64) -> f64| {
                let e = (0..c.k() * c.k()).map(|i| {
                    let x = c.get(i / c.k(), i % c.k());
                    if x < INF { f(x) } else { x }
                }).collect();
                CostMatrix::new(c.k(), e).unwrap()
            };
            let total = |m: &CostMatrix, p: &[usize]| -> f64 {
                p.iter().enumerate().map(|(r, &col)| m.get(r, col)).sum()
            };
            // Compare optimal values: ties may pick a different permutation.
            for m in [moved(&|x| x + shift), moved(&|x| x * scale)] {
                let a = hungarian(&m).unwrap();
                prop_assert!((total(&m, &a.pairing) - total(&m, &base.pairing)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identical_pairs_scale_with_k() {
        let k = 4;
        let net = NetworkRealization::new(
            [vec![0.5; k], vec![5.0; k]].concat(),
            vec![1.0; k * k],
            vec![0.1; k],
        )
        .unwrap();
        let cfg = SystemConfig::new(
            100.0,
            10.0,
            QosSpec::new(1.0).unwrap(),
            PairPolicy::new(Strategy::ModeSelect, RelayPower::Adaptive),
        )
        .unwrap();
        let sol = solve_network(&net, &cfg).unwrap();
        let single = cfg.solve_pair(&net, 0, 0).unwrap().sum_rate;
        assert!((sol.assignment.total_rate - k as f64 * single).abs() < 1e-12);
    }

    #[test]
    fn beats_fixed_pairings() {
        let stats = ChannelStats::from_db(10.0, 0.0, 6.0, 0.0).unwrap();
        let cfg = SystemConfig::new(
            1e3,
            1e3,
            QosSpec::new(1.0).unwrap(),
            PairPolicy::new(Strategy::ModeSelect, RelayPower::Adaptive),
        )
        .unwrap();
        for t in 0..50 {
            let net = sample_trial(&stats, 6, 1, t);
            let table = pair_table(&net, &cfg);
            let Ok(sol) = solve_table(6, &table) else { continue };
            for pairing in [(0..6).collect::<Vec<_>>(), (0..6).rev().collect()] {
                if let Some(t) = pairing_total(6, &table, &pairing) {
                    assert!(sol.assignment.total_rate >= t - 1e-12);
                }
            }
            for s in &sol.pairs {
                assert!(s.meets_qos(1.0));
            }
        }
    }

    #[test]
    fn virtual_user_leaves_strong_alone() {
        let net = NetworkRealization::new(vec![3.0, 1.0, 2.0], vec![1.0; 4], vec![0.5; 2]).unwrap();
        let cfg = SystemConfig::new(
            10.0,
            1.0,
            QosSpec::new(0.5).unwrap(),
            PairPolicy::new(Strategy::FullDuplex, RelayPower::Adaptive),
        )
        .unwrap();
        let s = cfg.solve_pair(&net, 1, 0).unwrap();
        assert_eq!(s.rates.weak, 0.0);
        assert!((s.sum_rate - 31f64.log2()).abs() < 1e-12);
    }
}
