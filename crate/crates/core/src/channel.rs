//! Random network realizations for Monte-Carlo trials.
//!
//! Rayleigh amplitudes give exponentially distributed power gains. Every
//! trial draws from its own ChaCha8 stream keyed by `(seed, trial, stream)`,
//! so any trial can be regenerated on its own, in any order, on any thread.
//! Draws are made at unit mean and scaled afterwards, which keeps the same
//! underlying randomness when only the means change.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::InputError;
use crate::rates::PairChannels;

/// Stream carrying the channel draws of a trial.
pub const CHANNEL_STREAM: u64 = 0;
/// Stream carrying the random-pairing permutation of a trial.
pub const PAIRING_STREAM: u64 = 1;

const STREAMS_PER_TRIAL: u64 = 16;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a dBm power to a linear SNR against `noise_floor_dbm`.
pub fn dbm_to_linear_normalized(dbm: f64, noise_floor_dbm: f64) -> f64 {
    db_to_linear(dbm - noise_floor_dbm)
}

/// Mean linear power gains of the four link classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub lambda_s: f64,
    pub lambda_w: f64,
    pub lambda_d: f64,
    pub lambda_si: f64,
}

impl ChannelStats {
    pub fn new(lambda_s: f64, lambda_w: f64, lambda_d: f64, lambda_si: f64) -> Result<Self, InputError> {
        for (name, v) in [
            ("strong-user mean gain", lambda_s),
            ("weak-user mean gain", lambda_w),
            ("D2D mean gain", lambda_d),
            ("SI mean gain", lambda_si),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(InputError::Gain { name, value: v });
            }
        }
        Ok(Self {
            lambda_s,
            lambda_w,
            lambda_d,
            lambda_si,
        })
    }

    pub fn from_db(s_db: f64, w_db: f64, d_db: f64, si_db: f64) -> Result<Self, InputError> {
        Self::new(db_to_linear(s_db), db_to_linear(w_db), db_to_linear(d_db), db_to_linear(si_db))
    }
}

/// One network: `2K` sorted direct gains, the `K x K` D2D gains from each
/// strong user to each weak user and the strong users' SI gains.
///
/// Weak user `n` is `gains[n]` and strong user `m` is `gains[K + m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    k: usize,
    virtual_weak: bool,
    gains: Vec<f64>,
    d2d: Vec<f64>,
    si: Vec<f64>,
}

impl NetworkRealization {
    /// `direct` holds every user's direct gain in any order; an odd count
    /// is padded with a virtual zero-gain user, which becomes weak user 0.
    /// `d2d` is row-major `[strong m][weak n]` over the sorted halves.
    pub fn new(mut direct: Vec<f64>, d2d: Vec<f64>, si: Vec<f64>) -> Result<Self, InputError> {
        if direct.is_empty() {
            return Err(InputError::Shape("network needs at least one user".into()));
        }
        let virtual_weak = direct.len() % 2 == 1;
        let k = (direct.len() + 1) / 2;
        if d2d.len() != k * k || si.len() != k {
            return Err(InputError::Shape(format!(
                "{k} pairs need {} D2D gains and {k} SI gains, got {} and {}",
                k * k,
                d2d.len(),
                si.len()
            )));
        }
        for (name, v) in direct
            .iter()
            .map(|&v| ("direct gain", v))
            .chain(d2d.iter().map(|&v| ("d2d gain", v)))
            .chain(si.iter().map(|&v| ("self-interference gain", v)))
        {
            if !(v.is_finite() && v >= 0.0) {
                return Err(InputError::Gain { name, value: v });
            }
        }
        direct.sort_by(f64::total_cmp);
        if virtual_weak {
            direct.insert(0, 0.0);
        }
        Ok(Self {
            k,
            virtual_weak,
            gains: direct,
            d2d,
            si,
        })
    }

    /// Number of pairs.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Weak user `n` is the padding user of an odd-sized network.
    pub fn is_virtual(&self, n: usize) -> bool {
        self.virtual_weak && n == 0
    }

    /// Sorted direct gains, ascending.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn weak_gain(&self, n: usize) -> f64 {
        self.gains[n]
    }

    pub fn strong_gain(&self, m: usize) -> f64 {
        self.gains[self.k + m]
    }

    pub fn d2d(&self, m: usize, n: usize) -> f64 {
        self.d2d[m * self.k + n]
    }

    pub fn si(&self, m: usize) -> f64 {
        self.si[m]
    }

    /// Channels of strong user `m` paired with weak user `n`.
    pub fn pair(&self, m: usize, n: usize) -> PairChannels {
        PairChannels::new(self.strong_gain(m), self.weak_gain(n), self.d2d(m, n), self.si(m))
            .expect("realization gains are validated")
    }
}

/// Generator for `stream` of `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(STREAMS_PER_TRIAL).wrapping_add(stream));
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit_uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exponential with unit mean, by inversion.
pub fn unit_exponential(rng: &mut impl RngCore) -> f64 {
    -(-unit_uniform(rng)).ln_1p()
}

pub fn sample_network(stats: &ChannelStats, k: usize, seed: u64) -> NetworkRealization {
    sample_trial(stats, k, seed, 0)
}

/// Network of trial `trial`. Draw order: `K` weak, `K` strong, `K^2` D2D
/// (row-major), `K` SI.
pub fn sample_trial(stats: &ChannelStats, k: usize, seed: u64, trial: u64) -> NetworkRealization {
    assert!(k >= 1, "network needs at least one pair");
    let mut rng = trial_rng(seed, trial, CHANNEL_STREAM);
    let mut draw = |n: usize, mean: f64| -> Vec<f64> {
        (0..n).map(|_| mean * unit_exponential(&mut rng)).collect()
    };
    let mut direct = draw(k, stats.lambda_w);
    direct.extend(draw(k, stats.lambda_s));
    let d2d = draw(k * k, stats.lambda_d);
    let si = draw(k, stats.lambda_si);
    NetworkRealization::new(direct, d2d, si).expect("sampled gains are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert_eq!(db_to_linear(10.0), 10.0);
        let x = dbm_to_linear_normalized(30.0, -100.0);
        assert!((x / 1e13 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_network() {
        let stats = ChannelStats::from_db(10.0, 0.0, 6.0, 0.0).unwrap();
        assert_eq!(sample_trial(&stats, 5, 7, 3), sample_trial(&stats, 5, 7, 3));
        assert_ne!(sample_trial(&stats, 5, 7, 3), sample_trial(&stats, 5, 7, 4));
        assert_ne!(sample_trial(&stats, 5, 7, 3), sample_trial(&stats, 5, 8, 3));
    }

    #[test]
    fn streams_are_independent() {
        let mut a = trial_rng(1, 0, CHANNEL_STREAM);
        let mut b = trial_rng(1, 0, PAIRING_STREAM);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn means_scale_the_same_draws() {
        let one = ChannelStats::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let two = ChannelStats::new(2.0, 2.0, 2.0, 2.0).unwrap();
        let a = sample_trial(&one, 3, 11, 0);
        let b = sample_trial(&two, 3, 11, 0);
        for (x, y) in a.gains().iter().zip(b.gains()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn structure() {
        let stats = ChannelStats::from_db(10.0, 0.0, 6.0, 0.0).unwrap();
        let net = sample_network(&stats, 4, 99);
        assert_eq!(net.gains().len(), 8);
        assert!(net.gains().windows(2).all(|w| w[0] <= w[1]));
        for m in 0..4 {
            for n in 0..4 {
                let ch = net.pair(m, n);
                assert!(ch.strong() >= ch.weak());
            }
        }
    }

    #[test]
    fn odd_user_count_gets_a_virtual_user() {
        let net = NetworkRealization::new(vec![3.0, 1.0, 2.0], vec![1.0; 4], vec![0.5; 2]).unwrap();
        assert_eq!(net.k(), 2);
        assert_eq!(net.gains(), &[0.0, 1.0, 2.0, 3.0]);
        assert!(net.is_virtual(0) && !net.is_virtual(1));
        assert!(NetworkRealization::new(vec![1.0, 2.0], vec![1.0; 4], vec![0.5]).is_err());
    }

    #[test]
    fn pooled_mean_matches() {
        // Equal means: sorting does not change the pooled average.
        let stats = ChannelStats::new(2.0, 2.0, 1.0, 1.0).unwrap();
        let trials = 100_000u64;
        let sum: f64 = (0..trials)
            .map(|t| sample_trial(&stats, 1, 5, t).gains().iter().sum::<f64>())
            .sum();
        let mean = sum / (2 * trials) as f64;
        assert!((mean / 2.0 - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn strong_draw_lands_on_top() {
        // P(weak draw > strong draw) = lw / (lw + ls) ~ 1e-4 here.
        let stats = ChannelStats::from_db(20.0, -20.0, 0.0, 0.0).unwrap();
        let hits = (0..10_000u64)
            .filter(|&t| {
                let mut rng = trial_rng(3, t, CHANNEL_STREAM);
                let weak = stats.lambda_w * unit_exponential(&mut rng);
                let strong = stats.lambda_s * unit_exponential(&mut rng);
                let net = sample_trial(&stats, 1, 3, t);
                net.strong_gain(0) == strong && strong > weak
            })
            .count();
        assert!(hits >= 9_900, "{hits}");
    }

    #[test]
    fn exponential_moments_within_three_sigma() {
        let n = 100_000usize;
        let mut rng = trial_rng(17, 0, 5);
        let xs: Vec<f64> = (0..n).map(|_| unit_exponential(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Unit exponential: variance 1, sample-variance sd ~ sqrt(8 / n).
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{mean}");
        assert!((var - 1.0).abs() < 3.0 * (8.0 / n as f64).sqrt(), "{var}");
    }
}
