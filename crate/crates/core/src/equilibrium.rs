//! Symmetric monotone equilibrium of the noisy-review grant contest.
//!
//! An applicant of quality `v` choosing application quality `x` earns
//! `v η(x) - (1 - k) x² / v`. In a monotone equilibrium the funding
//! probability of the type-`v` bid is `G(F(v))`, where `G` is the funding
//! probability by true rank, and the first-order condition integrates to
//!
//! ```text
//! b(v)² = 1 / (1 - k) ∫_{0.25}^{v} t² dG(F(t)),   b(0.25) = 0.
//! ```
//!
//! The integral is a Stieltjes sum over differences of `G` on a grid that is
//! uniform in quality, with the midpoint quality squared as integrand.

use alloc::vec::Vec;

use num_traits::Float;
use crate::error::{Error, Result};
use crate::quality::{ClaytonCopula, QualityDistribution};

pub const DEFAULT_GRID_SIZE: usize = 2001;
pub const MIN_GRID_SIZE: usize = 101;

const MONOTONE_SLACK: f64 = 1e-10;
const PARTICIPATION_SLACK: f64 = 1e-9;

/// Primitives of the expanded model. Private cost is `c(v, x) = x² / v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContestEnvironment {
    quality: QualityDistribution,
    noise: ClaytonCopula,
    k: f64,
    m: f64,
}

impl Default for ContestEnvironment {
    fn default() -> Self {
        Self {
            quality: QualityDistribution,
            noise: ClaytonCopula::default(),
            k: 1.0 / 3.0,
            m: 1.0,
        }
    }
}

impl ContestEnvironment {
    pub fn new(noise: ClaytonCopula, k: f64, m: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::invalid("k", k, "cost recoupment must lie in [0, 1)"));
        }
        if !(m.is_finite() && m >= 1.0) {
            return Err(Error::invalid("m", m, "social multiplier must be at least 1"));
        }
        Ok(Self {
            quality: QualityDistribution,
            noise,
            k,
            m,
        })
    }

    pub fn with_m(self, m: f64) -> Result<Self> {
        Self::new(self.noise, self.k, m)
    }

    pub fn quality(&self) -> &QualityDistribution {
        &self.quality
    }
    pub fn noise(&self) -> &ClaytonCopula {
        &self.noise
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Private cost `x² / v` of an application of quality `x`.
    pub fn cost(&self, v: f64, x: f64) -> f64 {
        x * x / v
    }

    /// Cost net of the recouped share `k`.
    pub fn unrecouped_cost(&self, v: f64, x: f64) -> f64 {
        (1.0 - self.k) * self.cost(v, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mechanism {
    /// Fund the top `payline` share of applications by evaluated rank.
    Payline { payline: f64 },
    /// Enter the top `line` share into a uniform lottery funding `funded`.
    Lottery { line: f64, funded: f64 },
}

impl Mechanism {
    pub fn payline(payline: f64) -> Result<Self> {
        let m = Mechanism::Payline { payline };
        m.validate()?;
        Ok(m)
    }

    pub fn lottery(line: f64, funded: f64) -> Result<Self> {
        let m = Mechanism::Lottery { line, funded };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Mechanism::Payline { payline } => {
                if !(payline > 0.0 && payline <= 1.0) {
                    return Err(Error::invalid("payline", payline, "must lie in (0, 1]"));
                }
            }
            Mechanism::Lottery { line, funded } => {
                if !(funded > 0.0 && funded <= 1.0) {
                    return Err(Error::invalid("funded", funded, "must lie in (0, 1]"));
                }
                if !(line >= funded && line <= 1.0) {
                    return Err(Error::invalid("line", line, "lottery line must lie in [funded, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Share of applications that receive an award.
    pub fn funded_fraction(&self) -> f64 {
        match *self {
            Mechanism::Payline { payline } => payline,
            Mechanism::Lottery { funded, .. } => funded,
        }
    }

    /// Share of applications competing at the review threshold.
    pub fn review_line(&self) -> f64 {
        match *self {
            Mechanism::Payline { payline } => payline,
            Mechanism::Lottery { line, .. } => line,
        }
    }

    /// Probability that an application above the review line is funded.
    pub fn draw_share(&self) -> f64 {
        match *self {
            Mechanism::Payline { .. } => 1.0,
            Mechanism::Lottery { line, funded } => funded / line,
        }
    }
}

/// Equilibrium funding probability of an application with true rank `u`:
/// the chance its evaluated rank clears `1 - line`, scaled by the lottery
/// draw share.
pub fn funding_probability(env: &ContestEnvironment, mech: &Mechanism, u: f64) -> Result<f64> {
    mech.validate()?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain("u", u, "[0, 1]"));
    }
    Ok(funding_probability_unchecked(env, mech, u))
}

pub(crate) fn funding_probability_unchecked(env: &ContestEnvironment, mech: &Mechanism, u: f64) -> f64 {
    let threshold = 1.0 - mech.review_line();
    mech.draw_share() * (1.0 - env.noise.conditional_cdf(u, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidRow {
    pub v: f64,
    pub u: f64,
    pub b: f64,
    pub eta: f64,
    pub payoff: f64,
}

/// Equilibrium bids on a quality grid, ordered by `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct BidSchedule {
    mechanism: Mechanism,
    noise: ClaytonCopula,
    k: f64,
    spacing: f64,
    rows: Vec<BidRow>,
}

impl BidSchedule {
    pub fn mechanism(&self) -> &Mechanism {
        &self.mechanism
    }

    pub fn rows(&self) -> &[BidRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Uniform quality spacing of the grid.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn max_bid(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.b)
    }

    pub(crate) fn check_solved_under(&self, env: &ContestEnvironment, mech: &Mechanism) -> Result<()> {
        if self.mechanism != *mech {
            return Err(Error::Mismatch("mechanism"));
        }
        if self.noise != env.noise || self.k != env.k {
            return Err(Error::Mismatch("environment"));
        }
        Ok(())
    }

    /// Piecewise-linear interpolation of the bid, clamped to the support.
    pub fn bid_at(&self, v: f64) -> f64 {
        let lo = QualityDistribution::LOWER;
        let last = self.rows.len() - 1;
        let pos = ((v - lo) / self.spacing).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last.saturating_sub(1));
        let frac = pos - i as f64;
        let (a, b) = (self.rows[i].b, self.rows[i + 1].b);
        a + (b - a) * frac
    }
}

/// Solves the equilibrium on a grid of `grid_size` qualities spanning the
/// support uniformly.
pub fn solve_bid_schedule(env: &ContestEnvironment, mech: &Mechanism, grid_size: usize) -> Result<BidSchedule> {
    mech.validate()?;
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::invalid("grid_size", grid_size as f64, "need at least 101 grid points"));
    }
    let lo = QualityDistribution::LOWER;
    let hi = QualityDistribution::UPPER;
    let spacing = (hi - lo) / (grid_size - 1) as f64;
    let one_minus_k = 1.0 - env.k;

    let mut rows = Vec::with_capacity(grid_size);
    let mut b2 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..grid_size {
        let v = if i + 1 == grid_size { hi } else { lo + i as f64 * spacing };
        let u = env.quality.cdf(v);
        let eta = funding_probability_unchecked(env, mech, u);
        if let Some((pv, peta)) = prev {
            let d_eta = eta - peta;
            if d_eta < -MONOTONE_SLACK {
                return Err(Error::NumericalFailure("funding probability decreases in rank"));
            }
            let t = 0.5 * (pv + v);
            b2 += t * t * d_eta.max(0.0) / one_minus_k;
        }
        let payoff = v * eta - one_minus_k * b2 / v;
        if payoff < -PARTICIPATION_SLACK {
            return Err(Error::NumericalFailure("negative equilibrium payoff, full participation fails"));
        }
        rows.push(BidRow {
            v,
            u,
            b: b2.sqrt(),
            eta,
            payoff,
        });
        prev = Some((v, eta));
    }

    Ok(BidSchedule {
        mechanism: *mech,
        noise: env.noise,
        k: env.k,
        spacing,
        rows,
    })
}

/// Expected equilibrium payoff `v η(b(v)) - (1 - k) c(v, b(v))` of a type-`v`
/// applicant, with the bid interpolated from `schedule`.
pub fn applicant_value(
    env: &ContestEnvironment,
    mech: &Mechanism,
    schedule: &BidSchedule,
    v: f64,
) -> Result<f64> {
    schedule.check_solved_under(env, mech)?;
    if !env.quality.contains(v) {
        return Err(Error::domain("v", v, "[0.25, 1]"));
    }
    let b = schedule.bid_at(v);
    let eta = funding_probability_unchecked(env, mech, env.quality.cdf(v));
    Ok(v * eta - env.unrecouped_cost(v, b))
}
