//! Achievable rates of a strong/weak user pair.
//!
//! Noise is unit variance everywhere, so every `power * gain` product is an
//! SNR and all quantities here are dimensionless linear values. Rates are in
//! bits/s/Hz.
//!
//! Three transmission schemes are covered:
//!
//! * half-duplex cooperative NOMA (two slots, hence the `1/2` prefactor; the
//!   weak user combines the direct and relayed copies by repetition decoding),
//! * full-duplex cooperative NOMA (one slot, the relay suffers residual
//!   self-interference, the weak user combines both copies by MRC),
//! * plain two-user NOMA without cooperation.

use std::f64::consts::LN_2;

use crate::error::InputError;

/// Linear power gains of one candidate pair.
///
/// The strong user is always the one with the larger direct gain: the
/// constructor swaps the two direct gains when needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairChannels {
    strong: f64,
    weak: f64,
    d2d: f64,
    si: f64,
}

impl PairChannels {
    pub fn new(direct_a: f64, direct_b: f64, d2d: f64, si: f64) -> Result<Self, InputError> {
        check_gain("direct gain", direct_a)?;
        check_gain("direct gain", direct_b)?;
        check_gain("d2d gain", d2d)?;
        check_gain("self-interference gain", si)?;
        let (strong, weak) = if direct_a >= direct_b {
            (direct_a, direct_b)
        } else {
            (direct_b, direct_a)
        };
        Ok(Self {
            strong,
            weak,
            d2d,
            si,
        })
    }

    /// BS to strong user.
    pub fn strong(&self) -> f64 {
        self.strong
    }

    /// BS to weak user.
    pub fn weak(&self) -> f64 {
        self.weak
    }

    /// Strong user to weak user (relay link).
    pub fn d2d(&self) -> f64 {
        self.d2d
    }

    /// Residual self-interference at the strong user when relaying full-duplex.
    pub fn si(&self) -> f64 {
        self.si
    }

    pub fn with_si(self, si: f64) -> Result<Self, InputError> {
        check_gain("self-interference gain", si)?;
        Ok(Self { si, ..self })
    }
}

fn check_gain(name: &'static str, value: f64) -> Result<(), InputError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(InputError::Gain { name, value })
    }
}

/// Power split at the BS and relay transmit power.
///
/// `alpha` is the fraction of the BS power carrying the weak user's message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDecision {
    pub alpha: f64,
    pub p_d: f64,
}

impl PowerDecision {
    pub fn new(alpha: f64, p_d: f64) -> Result<Self, InputError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(InputError::Alpha(alpha));
        }
        if !(p_d.is_finite() && p_d >= 0.0) {
            return Err(InputError::Power {
                name: "relay power",
                value: p_d,
            });
        }
        Ok(Self { alpha, p_d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub strong: f64,
    pub weak: f64,
}

impl RatePair {
    pub fn sum(&self) -> f64 {
        self.strong + self.weak
    }

    pub fn min(&self) -> f64 {
        self.strong.min(self.weak)
    }
}

/// `log2(1 + sinr)`.
pub fn capacity(sinr: f64) -> f64 {
    sinr.ln_1p() / LN_2
}

/// SINR of the weak user's message at a receiver with direct gain `gain`,
/// treating the strong user's message and `extra` as interference.
fn weak_message_sinr(alpha: f64, p_bs: f64, gain: f64, extra: f64) -> f64 {
    alpha * p_bs * gain / ((1.0 - alpha) * p_bs * gain + extra + 1.0)
}

/// Rate at which the strong user decodes the weak user's message (HD).
pub fn hd_relay_decode_rate(ch: &PairChannels, alpha: f64, p_bs: f64) -> f64 {
    0.5 * capacity(weak_message_sinr(alpha, p_bs, ch.strong, 0.0))
}

/// Weak user's rate after repetition decoding of the direct and relayed copies (HD).
pub fn hd_combined_rate(ch: &PairChannels, dec: PowerDecision, p_bs: f64) -> f64 {
    let direct = weak_message_sinr(dec.alpha, p_bs, ch.weak, 0.0);
    0.5 * capacity(dec.p_d * ch.d2d + direct)
}

pub fn hd_rates(ch: &PairChannels, dec: PowerDecision, p_bs: f64) -> RatePair {
    let strong = 0.5 * capacity((1.0 - dec.alpha) * p_bs * ch.strong);
    let weak = hd_combined_rate(ch, dec, p_bs).min(hd_relay_decode_rate(ch, dec.alpha, p_bs));
    RatePair { strong, weak }
}

/// Rate at which the strong user decodes the weak user's message while
/// relaying (FD), self-interference included.
pub fn fd_relay_decode_rate(ch: &PairChannels, dec: PowerDecision, p_bs: f64) -> f64 {
    capacity(weak_message_sinr(
        dec.alpha,
        p_bs,
        ch.strong,
        dec.p_d * ch.si,
    ))
}

/// Weak user's rate after maximum-ratio combining (FD).
pub fn fd_combined_rate(ch: &PairChannels, dec: PowerDecision, p_bs: f64) -> f64 {
    let direct = weak_message_sinr(dec.alpha, p_bs, ch.weak, 0.0);
    capacity(dec.p_d * ch.d2d + direct)
}

pub fn fd_rates(ch: &PairChannels, dec: PowerDecision, p_bs: f64) -> RatePair {
    let strong = capacity((1.0 - dec.alpha) * p_bs * ch.strong / (dec.p_d * ch.si + 1.0));
    let weak = fd_relay_decode_rate(ch, dec, p_bs).min(fd_combined_rate(ch, dec, p_bs));
    RatePair { strong, weak }
}

/// Two-user downlink NOMA without cooperation.
///
/// The weak user's rate is capped by what the strong user can decode,
/// otherwise SIC at the strong user would fail.
pub fn noma_rates(ch: &PairChannels, alpha: f64, p_bs: f64) -> RatePair {
    let strong = capacity((1.0 - alpha) * p_bs * ch.strong);
    let direct = capacity(weak_message_sinr(alpha, p_bs, ch.weak, 0.0));
    let cap = capacity(weak_message_sinr(alpha, p_bs, ch.strong, 0.0));
    RatePair {
        strong,
        weak: direct.min(cap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ch(m: f64, n: f64, d: f64, si: f64) -> PairChannels {
        PairChannels::new(m, n, d, si).unwrap()
    }

    fn dec(alpha: f64, p_d: f64) -> PowerDecision {
        PowerDecision::new(alpha, p_d).unwrap()
    }

    #[test]
    fn construction_orders_strong_and_weak() {
        let c = ch(0.1, 1.0, 0.5, 0.0);
        assert_eq!(c.strong(), 1.0);
        assert_eq!(c.weak(), 0.1);
        assert!(PairChannels::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(PairChannels::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(PowerDecision::new(1.5, 0.0).is_err());
        assert!(PowerDecision::new(0.5, -1.0).is_err());
    }

    #[test]
    fn hd_zero_alpha() {
        // gamma_m * p_bs = 15
        let r = hd_rates(&ch(1.5, 0.1, 0.5, 0.0), dec(0.0, 7.0), 10.0);
        assert!((r.strong - 2.0).abs() < 1e-15);
        assert_eq!(r.weak, 0.0);
    }

    #[test]
    fn full_alpha_silences_strong_user() {
        let c = ch(2.0, 0.2, 1.0, 0.05);
        assert_eq!(hd_rates(&c, dec(1.0, 3.0), 10.0).strong, 0.0);
        assert_eq!(fd_rates(&c, dec(1.0, 3.0), 10.0).strong, 0.0);
    }

    // Reference values from a standalone scalar evaluation of each rate
    // expression (python, float64).
    #[test]
    fn hd_reference_point() {
        // SINR_mn = 5/6, SINR_m = 5, SINR_rd = 1 + 0.5/1.5
        let r = hd_rates(&ch(1.0, 0.1, 0.5, 0.0), dec(0.5, 2.0), 10.0);
        assert!((r.strong - 1.292_481_250_360_578).abs() < 1e-14);
        assert!((r.weak - 0.437_234_558_958_070_6).abs() < 1e-14);
    }

    #[test]
    fn fd_reference_point() {
        // SINR_mn = 8/13.15, SINR_m = 12/1.15, SINR_mrc = 3 + 0.8/2.2
        let r = fd_rates(&ch(2.0, 0.2, 1.0, 0.05), dec(0.4, 3.0), 10.0);
        assert!((r.strong - 3.515_357_033_235_289_5).abs() < 1e-14);
        assert!((r.weak - 0.685_594_863_827_647_2).abs() < 1e-14);
    }

    #[test]
    fn noma_reference_point() {
        // SINR_n = 0.3/1.7, cap SINR = 3/8, SINR_m = 7
        let r = noma_rates(&ch(1.0, 0.1, 0.0, 0.0), 0.3, 10.0);
        assert!((r.strong - 3.0).abs() < 1e-14);
        assert!((r.weak - 0.234_465_253_637_023_2).abs() < 1e-14);
    }

    #[test]
    fn noma_zero_alpha_and_equal_users() {
        let c = ch(1.0, 0.1, 0.0, 0.0);
        assert_eq!(noma_rates(&c, 0.0, 10.0).weak, 0.0);
        let eq = ch(0.7, 0.7, 0.0, 0.0);
        let r = noma_rates(&eq, 0.4, 10.0);
        let direct = capacity(0.4 * 7.0 / (0.6 * 7.0 + 1.0));
        assert_eq!(r.weak, direct);
    }

    proptest! {
        #[test]
        fn fd_without_si_or_relay_doubles_hd(
            m in 0.0f64..100.0, n in 0.0f64..100.0, d in 0.0f64..100.0,
            alpha in 0.0f64..=1.0, p_bs in 1e-3f64..1e5,
        ) {
            let c = ch(m, n, d, 0.0);
            let h = hd_rates(&c, dec(alpha, 0.0), p_bs);
            let f = fd_rates(&c, dec(alpha, 0.0), p_bs);
            prop_assert!((f.strong - 2.0 * h.strong).abs() <= 1e-12 * f.strong.max(1e-300));
            prop_assert!((f.weak - 2.0 * h.weak).abs() <= 1e-12 * f.weak.max(1e-300));
        }

        #[test]
        fn weak_rate_bounded_by_relay_decoding(
            m in 0.0f64..100.0, n in 0.0f64..100.0, d in 0.0f64..100.0, si in 0.0f64..100.0,
            alpha in 0.0f64..=1.0, p_d in 0.0f64..1e4, p_bs in 1e-3f64..1e5,
        ) {
            let c = ch(m, n, d, si);
            let x = dec(alpha, p_d);
            let h = hd_rates(&c, x, p_bs);
            let f = fd_rates(&c, x, p_bs);
            prop_assert!(h.weak <= hd_relay_decode_rate(&c, alpha, p_bs));
            prop_assert!(f.weak <= fd_relay_decode_rate(&c, x, p_bs));
            for v in [h.strong, h.weak, f.strong, f.weak] {
                prop_assert!(v.is_finite() && v >= 0.0);
            }
        }

        #[test]
        fn monotone_in_alpha_and_relay_power(
            m in 1e-3f64..100.0, n in 1e-3f64..100.0, d in 1e-3f64..100.0, si in 0.0f64..100.0,
            a in 0.0f64..0.99, da in 1e-3f64..0.01, p_d in 0.0f64..1e3, dp in 1e-3f64..10.0,
            p_bs in 1e-2f64..1e5,
        ) {
            let c = ch(m, n, d, si);
            let a2 = (a + da).min(1.0);
            prop_assert!(hd_rates(&c, dec(a2, p_d), p_bs).strong < hd_rates(&c, dec(a, p_d), p_bs).strong);
            prop_assert!(fd_rates(&c, dec(a2, p_d), p_bs).strong < fd_rates(&c, dec(a, p_d), p_bs).strong);
            prop_assert!(hd_combined_rate(&c, dec(a, p_d + dp), p_bs) >= hd_combined_rate(&c, dec(a, p_d), p_bs));
            prop_assert!(fd_combined_rate(&c, dec(a, p_d + dp), p_bs) >= fd_combined_rate(&c, dec(a, p_d), p_bs));
        }
    }
}
