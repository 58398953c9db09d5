//! Wall-clock timing of the two phases of a network solve.

use std::time::Instant;

use cnoma::assignment::{hungarian, pair_table, CostMatrix, SystemConfig};
use cnoma::channel::{sample_trial, ChannelStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub k: usize,
    /// Median seconds to fill the `K x K` pair table.
    pub fill: f64,
    /// Median seconds of the matching.
    pub hungarian: f64,
    /// Median seconds of fill plus matching in the same repetition.
    pub total: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Times `reps` networks of `k` pairs; repetition `r` solves trial `r`.
pub fn bench_k(stats: &ChannelStats, config: &SystemConfig, k: usize, reps: usize, seed: u64) -> BenchRow {
    let mut fill = Vec::with_capacity(reps);
    let mut matching = Vec::with_capacity(reps);
    let mut total = Vec::with_capacity(reps);
    for r in 0..reps {
        let net = sample_trial(stats, k, seed, r as u64);
        let t0 = Instant::now();
        let table = pair_table(&net, config);
        let rates: Vec<Option<f64>> = table.iter().map(|s| s.map(|s| s.sum_rate)).collect();
        let cost = CostMatrix::from_rates(k, &rates).expect("finite rates");
        let t1 = Instant::now();
        // An infeasible network still runs the full search before failing.
        let _ = std::hint::black_box(hungarian(&cost));
        let t2 = Instant::now();
        fill.push((t1 - t0).as_secs_f64());
        matching.push((t2 - t1).as_secs_f64());
        total.push((t2 - t0).as_secs_f64());
    }
    BenchRow {
        k,
        fill: median(fill),
        hungarian: median(matching),
        total: median(total),
    }
}

/// Least-squares slope of `ln t` against `ln k`.
pub fn scaling_exponent(rows: &[BenchRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.k as f64).ln(), r.hungarian.max(1e-12).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
