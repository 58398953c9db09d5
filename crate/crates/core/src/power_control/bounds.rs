use super::PairProblem;

/// The three boundaries of one pair's feasible `(alpha, p_d)` region.
///
/// With `x = gamma_d * p_d`, `P = p_bs` and SINR threshold `delta`:
///
/// ```text
/// A(p) = delta (P gm + gsi p + 1) / (P gm (1 + delta))     SIC at the strong user
/// B(p) = (P gn + 1)(delta - x) / (P gn (delta + 1 - x))     weak user's combined SINR
/// C(p) = 1 - delta (gsi p + 1) / (P gm)                     strong user's own rate
/// ```
///
/// The HD region uses the HD threshold and `gsi = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBounds {
    p_bs: f64,
    gm: f64,
    gn: f64,
    gd: f64,
    gsi: f64,
    delta: f64,
}

impl RegionBounds {
    pub fn half_duplex(problem: &PairProblem) -> Self {
        Self::with(problem, problem.qos.delta_hd(), 0.0)
    }

    pub fn full_duplex(problem: &PairProblem) -> Self {
        Self::with(problem, problem.qos.delta_fd(), problem.channels.si())
    }

    fn with(problem: &PairProblem, delta: f64, gsi: f64) -> Self {
        let ch = &problem.channels;
        Self {
            p_bs: problem.p_bs,
            gm: ch.strong(),
            gn: ch.weak(),
            gd: ch.d2d(),
            gsi,
            delta,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `A(p_d)`.
    pub fn sic(&self, p_d: f64) -> f64 {
        let pgm = self.p_bs * self.gm;
        self.delta * (pgm + self.gsi * p_d + 1.0) / (pgm * (1.0 + self.delta))
    }

    /// `B(p_d)` as a plain rational function, pole included.
    pub fn combining_raw(&self, p_d: f64) -> f64 {
        let x = self.gd * p_d;
        let pgn = self.p_bs * self.gn;
        (pgn + 1.0) * (self.delta - x) / (pgn * (self.delta + 1.0 - x))
    }

    /// `B(p_d)` restricted to the QoS meaning: zero once the relay link
    /// alone reaches the threshold, infinite when the weak user has no
    /// direct link and the relay falls short.
    pub fn combining(&self, p_d: f64) -> f64 {
        if self.gd * p_d >= self.delta {
            0.0
        } else if self.gn == 0.0 {
            f64::INFINITY
        } else {
            self.combining_raw(p_d)
        }
    }

    /// `C(p_d)`.
    pub fn strong_qos(&self, p_d: f64) -> f64 {
        1.0 - self.delta * (self.gsi * p_d + 1.0) / (self.p_bs * self.gm)
    }

    /// Smallest QoS-compatible `alpha` for the weak side, `max(A, B)`.
    pub fn min_alpha(&self, p_d: f64) -> f64 {
        self.sic(p_d).max(self.combining(p_d))
    }

    /// `(1 - max(A, B)) / (1 + gsi p_d)`: the strong user's SINR on the
    /// lower boundary is `P gm` times this, and it is all the sum rate
    /// depends on there.
    pub fn headroom(&self, p_d: f64) -> f64 {
        (1.0 - self.min_alpha(p_d)) / (1.0 + self.gsi * p_d)
    }

    /// Headroom needed for the strong user's QoS, `delta / (P gm)`.
    pub fn headroom_threshold(&self) -> f64 {
        self.delta / (self.p_bs * self.gm)
    }

    /// Coefficients `[c, l, a]` of `a p^2 - l p + c`, which has the sign of
    /// `B(p) - A(p)` below the pole of `B`.
    pub fn crossing_quadratic(&self) -> [f64; 3] {
        let (p, gm, gn, gd, gsi, d) = (self.p_bs, self.gm, self.gn, self.gd, self.gsi, self.delta);
        let c = d * (d + 1.0) * p * (gm - gn);
        let l = p * p * gm * gn * gd
            + p * (gm * gd * (1.0 + d) - d * gn * gd + d * (d + 1.0) * gn * gsi);
        let a = d * p * gn * gsi * gd;
        [c, l, a]
    }

    /// The relay power where `B` falls to meet `A` (`P_int` in HD, `b2` in
    /// FD): the smaller root of [`Self::crossing_quadratic`]. Zero when
    /// `B(0) <= A(0)`, infinite when `B` never reaches `A`.
    pub fn crossing_power(&self) -> f64 {
        let [c, l, a] = self.crossing_quadratic();
        if c <= 0.0 {
            return 0.0;
        }
        let disc = (l * l - 4.0 * a * c).max(0.0);
        let den = l + disc.sqrt();
        if den > 0.0 {
            2.0 * c / den
        } else {
            f64::INFINITY
        }
    }

    /// Coefficients `[a0, a1, a2]` of `f(p) = a2 p^2 + a1 p + a0`, which
    /// has the sign of `C(p) - B(p)` below the pole of `B`.
    pub fn upper_quadratic(&self) -> [f64; 3] {
        let (p, gm, gn, gd, gsi, d) = (self.p_bs, self.gm, self.gn, self.gd, self.gsi, self.delta);
        let a2 = p * gn * gd * d * gsi;
        let a1 = p * (gm * gd + gn * gd * d - gn * gsi * d * d - gn * gsi * d);
        let a0 = p * (p * gm * gn - gm * d - gn * d * d - gn * d);
        [a0, a1, a2]
    }
}
