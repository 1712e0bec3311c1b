//! Idea quality and review noise.
//!
//! Quality `v` has CDF `F(v) = 1 - (16/9)(1 - v)^2` on `[0.25, 1]`. Review
//! noise is a Clayton copula joining an application's true quality rank `u`
//! with its evaluated rank `s`. Because equilibrium bids are strictly
//! increasing in `v`, the rank of quality and the rank of application quality
//! coincide, so everything downstream works on ranks.


use num_traits::Float;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QualityDistribution;

impl QualityDistribution {
    pub const LOWER: f64 = 0.25;
    pub const UPPER: f64 = 1.0;

    /// Closed-form mean, `∫ v dF(v)` over the support.
    pub const MEAN: f64 = 0.5;

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= Self::LOWER {
            0.0
        } else if v >= Self::UPPER {
            1.0
        } else {
            let d = 1.0 - v;
            1.0 - 16.0 / 9.0 * d * d
        }
    }

    pub fn density(&self, v: f64) -> f64 {
        if (Self::LOWER..=Self::UPPER).contains(&v) {
            32.0 / 9.0 * (1.0 - v)
        } else {
            0.0
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain("u", u, "[0, 1]"));
        }
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        let v = 1.0 - 0.75 * (1.0 - u).sqrt();
        v.clamp(Self::LOWER, Self::UPPER)
    }

    pub fn contains(&self, v: f64) -> bool {
        (Self::LOWER..=Self::UPPER).contains(&v)
    }
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 30.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// `ln(e^x - 1)` for `x >= 0`; `-inf` at zero.
fn ln_expm1(x: f64) -> f64 {
    if x > 50.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaytonCopula {
    theta: f64,
}

impl Default for ClaytonCopula {
    fn default() -> Self {
        Self {
            theta: Self::DEFAULT_THETA,
        }
    }
}

impl ClaytonCopula {
    pub const DEFAULT_THETA: f64 = 10.0;

    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::invalid("theta", theta, "Clayton dependence must be positive"));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Joint CDF `C(u, s) = (u^-θ + s^-θ - 1)^(-1/θ)`, zero on the lower edges.
    pub fn cdf(&self, u: f64, s: f64) -> f64 {
        let (u, s) = (u.clamp(0.0, 1.0), s.clamp(0.0, 1.0));
        if u == 0.0 || s == 0.0 {
            return 0.0;
        }
        let t = self.theta;
        (u.powf(-t) + s.powf(-t) - 1.0).powf(-1.0 / t)
    }

    /// `P(S <= s | U = u) = ∂C/∂u = (1 + u^θ (s^-θ - 1))^(-(θ+1)/θ)`.
    ///
    /// The `u -> 0` limit is 1 for every `s > 0`.
    pub fn conditional_cdf(&self, u: f64, s: f64) -> f64 {
        let (u, s) = (u.clamp(0.0, 1.0), s.clamp(0.0, 1.0));
        if s == 0.0 {
            return 0.0;
        }
        if u == 0.0 || s == 1.0 {
            return 1.0;
        }
        let t = self.theta;
        let ln_a = t * u.ln() + ln_expm1(-t * s.ln());
        (-(t + 1.0) / t * softplus(ln_a)).exp()
    }

    /// Inverse of [`conditional_cdf`](Self::conditional_cdf) in `s`.
    pub fn conditional_quantile(&self, u: f64, q: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain("u", u, "(0, 1]"));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain("q", q, "(0, 1)"));
        }
        Ok(self.conditional_quantile_unchecked(u, q))
    }

    pub(crate) fn conditional_quantile_unchecked(&self, u: f64, q: f64) -> f64 {
        let t = self.theta;
        let ln_b = -t * u.ln() + ln_expm1(-t / (t + 1.0) * q.ln());
        (-softplus(ln_b) / t).exp()
    }
}
