//! The one-prize Tullock contest with `n` identical scientists.
//!
//! A grant of private value `v` goes to one of `n` scientists, each sinking
//! effort at linear cost `c`. Once awarded the grant is worth `m * v` to the
//! planner, and every unit of effort spills `w` of social value regardless of
//! who wins.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleContestParams {
    n: f64,
    v: f64,
    c: f64,
    m: f64,
    w: f64,
}

impl SimpleContestParams {
    pub fn new(n: u32, v: f64, c: f64, m: f64, w: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", f64::from(n), "need at least two scientists"));
        }
        Self::continuous(f64::from(n), v, c, m, w)
    }

    /// Same model with the number of scientists treated as a real number
    /// `n > 1`, for comparative statics in `n`.
    pub fn continuous(n: f64, v: f64, c: f64, m: f64, w: f64) -> Result<Self> {
        if !(n.is_finite() && n > 1.0) {
            return Err(Error::invalid("n", n, "need more than one scientist"));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid("v", v, "prize value must be positive"));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("c", c, "effort cost must be positive"));
        }
        if !(m.is_finite() && m >= 1.0) {
            return Err(Error::invalid("m", m, "social multiplier must be at least 1"));
        }
        if !w.is_finite() {
            return Err(Error::invalid("w", w, "externality must be finite"));
        }
        Ok(Self { n, v, c, m, w })
    }

    pub fn n(&self) -> f64 {
        self.n
    }
    pub fn v(&self) -> f64 {
        self.v
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn w(&self) -> f64 {
        self.w
    }

    /// Symmetric equilibrium effort `v (n - 1) / (c n^2)`.
    pub fn equilibrium_effort(&self) -> f64 {
        self.v * (self.n - 1.0) / (self.c * self.n * self.n)
    }

    /// Planner surplus `m v - n c x*` under the contest.
    pub fn contest_value(&self) -> f64 {
        (self.m - (self.n - 1.0) / self.n) * self.v
    }

    /// Planner surplus when the grant is allocated by a costless lottery.
    pub fn lottery_value(&self) -> f64 {
        self.m * self.v
    }

    /// Planner surplus `m v - n (c - w) x*` once effort carries the
    /// externality `w`. Equals the lottery value exactly at `w = c`.
    pub fn contest_value_with_externality(&self) -> f64 {
        (self.m - (self.c - self.w) * (self.n - 1.0) / (self.c * self.n)) * self.v
    }

    /// Mixed partial of the externality-adjusted contest value in `n` and `w`.
    pub fn competition_externality_cross_partial(&self) -> f64 {
        self.v / (self.c * self.n * self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, v: f64, c: f64, m: f64, w: f64) -> SimpleContestParams {
        SimpleContestParams::new(n, v, c, m, w).unwrap()
    }

    #[test]
    fn effort_examples() {
        assert_eq!(params(2, 1.0, 1.0, 1.0, 0.0).equilibrium_effort(), 0.25);
        assert!((params(10, 1.0, 1.0, 1.0, 0.0).equilibrium_effort() - 0.09).abs() < 1e-15);
    }

    #[test]
    fn effort_is_a_grid_best_response() {
        // Opponents all play x*; scan the deviator's Tullock payoff.
        let p = params(2, 1.0, 1.0, 1.0, 0.0);
        let star = p.equilibrium_effort();
        let others = (p.n() - 1.0) * star;
        let payoff = |x: f64| x / (x + others) * p.v() - p.c() * x;
        let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
        for i in 0..=100_000 {
            let x = i as f64 * 1e-5;
            let u = payoff(x);
            if u > best {
                best = u;
                best_x = x;
            }
        }
        assert!((best_x - star).abs() <= 1e-5, "grid argmax {best_x} vs {star}");
    }

    #[test]
    fn values() {
        let p = params(2, 1.0, 1.0, 1.0, 0.0);
        assert_eq!(p.contest_value(), 0.5);
        assert_eq!(p.lottery_value(), 1.0);
        assert_eq!(params(2, 0.5, 1.0, 3.0, 0.0).lottery_value(), 1.5);

        let p = params(10, 1.0, 1.0, 2.0, 0.0);
        let from_parts = p.m() * p.v() - p.n() * p.c() * p.equilibrium_effort();
        assert!((p.contest_value() - 1.1).abs() < 1e-15);
        assert!((p.contest_value() - from_parts).abs() < 1e-15);

        let big = params(1_000_000, 1.0, 1.0, 1.0, 0.0).contest_value();
        assert!(big > 0.0 && big < 1e-5);
    }

    #[test]
    fn externality_values() {
        let p = params(2, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(p.contest_value_with_externality(), 1.0);
        assert_eq!(p.contest_value_with_externality(), p.lottery_value());
        let p = params(2, 1.0, 1.0, 1.0, 0.0);
        assert_eq!(p.contest_value_with_externality(), p.contest_value());
        let p = params(5, 1.0, 2.0, 1.0, 1.0);
        assert!((p.contest_value_with_externality() - 0.6).abs() < 1e-15);
        // negative externalities are allowed
        let p = params(5, 1.0, 2.0, 1.0, -1.0);
        assert!(p.contest_value_with_externality() < p.contest_value());
    }

    #[test]
    fn cross_partial_matches_finite_differences() {
        let p = params(2, 1.0, 1.0, 1.0, 0.0);
        assert_eq!(p.competition_externality_cross_partial(), 0.25);
        let f = |n: f64, w: f64| {
            SimpleContestParams::continuous(n, 1.0, 1.0, 1.0, w)
                .unwrap()
                .contest_value_with_externality()
        };
        let h = 1e-4;
        let fd = (f(2.0 + h, h) - f(2.0 + h, -h) - f(2.0 - h, h) + f(2.0 - h, -h)) / (4.0 * h * h);
        assert!((fd - 0.25).abs() < 1e-6, "{fd}");
    }

    #[test]
    fn rejects_invalid() {
        assert!(SimpleContestParams::new(1, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(SimpleContestParams::new(2, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(SimpleContestParams::new(2, 1.0, -1.0, 1.0, 0.0).is_err());
        assert!(SimpleContestParams::new(2, 1.0, 1.0, 0.5, 0.0).is_err());
        assert!(SimpleContestParams::new(2, 1.0, 1.0, 1.0, f64::NAN).is_err());
        assert!(SimpleContestParams::continuous(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(SimpleContestParams::continuous(1.5, 1.0, 1.0, 1.0, 0.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn first_order_condition_and_ordering(
                n in 2u32..500, v in 0.01f64..100.0, c in 0.01f64..100.0,
                m in 1.0f64..10.0, w in -10.0f64..10.0,
            ) {
                let p = SimpleContestParams::new(n, v, c, m, w).unwrap();
                let x = p.equilibrium_effort();
                let nf = f64::from(n);
                let foc = v * (nf - 1.0) / (nf * nf * x);
                prop_assert!(((foc - c) / c).abs() < 1e-12);
                prop_assert!(p.lottery_value() > p.contest_value());
                prop_assert!(p.competition_externality_cross_partial() > 0.0);

                // linear in w with slope (n-1) v / (c n)
                let q = SimpleContestParams::new(n, v, c, m, w + 1.0).unwrap();
                let slope = q.contest_value_with_externality() - p.contest_value_with_externality();
                let expected = (nf - 1.0) * v / (c * nf);
                prop_assert!((slope - expected).abs() <= 1e-9 * (1.0 + expected.abs() + p.contest_value_with_externality().abs()));

                let more = SimpleContestParams::new(n, v, c * 2.0, m, w).unwrap();
                prop_assert!(more.equilibrium_effort() < x);
            }
        }
    }
}
