//! Per-award planner accounting for a solved contest.
//!
//! With applicants distributed by `F`, each `∫ · dF(v)` is evaluated on the
//! bid solver's own grid as `∫ · f(v) dv`, and every total is divided by the
//! share of applications actually funded.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_traits::Float;
use crate::equilibrium::{solve_bid_schedule, BidSchedule, ContestEnvironment, Mechanism};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_uniform, Rule};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum ExternalitySpec {
    #[default]
    None,
    /// Planner gains `k v x^(1/r)` from every application of quality `x`.
    InverseCost { r: f64 },
    /// A share `sqrt(b) / 3` of each idea is realized by applying alone; the
    /// rest only when funded.
    PartialCompletion,
}

impl ExternalitySpec {
    pub fn inverse_cost(r: f64) -> Result<Self> {
        let spec = ExternalitySpec::InverseCost { r };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let ExternalitySpec::InverseCost { r } = *self {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::invalid("r", r, "shape parameter must be positive"));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExternalitySpec::None => "none",
            ExternalitySpec::InverseCost { .. } => "inverse-cost",
            ExternalitySpec::PartialCompletion => "partial-completion",
        }
    }

    pub fn r(&self) -> Option<f64> {
        match *self {
            ExternalitySpec::InverseCost { r } => Some(r),
            _ => None,
        }
    }

    /// Externality value `k v x^(1/r)`; zero for the other kinds.
    pub fn effort_value(&self, env: &ContestEnvironment, v: f64, x: f64) -> f64 {
        match *self {
            ExternalitySpec::InverseCost { r } => env.k() * v * x.powf(1.0 / r),
            _ => 0.0,
        }
    }

    /// Share of an idea realized through application effort alone.
    pub fn completion_share(&self, b: f64) -> f64 {
        match self {
            ExternalitySpec::PartialCompletion => b.sqrt() / 3.0,
            _ => 0.0,
        }
    }

    /// Planner benefit from one applicant of quality `v` with bid `b` and
    /// funding indicator or probability `funded`.
    pub fn benefit(&self, env: &ContestEnvironment, v: f64, b: f64, funded: f64) -> f64 {
        match self {
            ExternalitySpec::PartialCompletion => {
                let w = self.completion_share(b);
                env.m() * (w * v + (1.0 - w) * v * funded)
            }
            _ => env.m() * v * funded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContestOutcome {
    pub benefit: f64,
    pub cost: f64,
    pub externality: f64,
    /// `benefit + externality - cost`, all per award.
    pub productivity: f64,
    pub mechanism: Mechanism,
    pub externality_spec: ExternalitySpec,
}

/// Per-award benefit, cost and externality of a solved schedule.
pub fn evaluate(
    env: &ContestEnvironment,
    mech: &Mechanism,
    schedule: &BidSchedule,
    ext: &ExternalitySpec,
) -> Result<ContestOutcome> {
    evaluate_with(env, mech, schedule, ext, Rule::Trapezoid)
}

/// [`evaluate`] with an explicit quadrature rule.
pub fn evaluate_with(
    env: &ContestEnvironment,
    mech: &Mechanism,
    schedule: &BidSchedule,
    ext: &ExternalitySpec,
    rule: Rule,
) -> Result<ContestOutcome> {
    mech.validate()?;
    ext.validate()?;
    schedule.check_solved_under(env, mech)?;

    let q = env.quality();
    let rows = schedule.rows();
    let mut benefit = Vec::with_capacity(rows.len());
    let mut cost = Vec::with_capacity(rows.len());
    let mut externality = Vec::with_capacity(rows.len());
    for r in rows {
        let f = q.density(r.v);
        benefit.push(ext.benefit(env, r.v, r.b, r.eta) * f);
        cost.push(env.unrecouped_cost(r.v, r.b) * f);
        externality.push(ext.effort_value(env, r.v, r.b) * f);
    }
    let h = schedule.spacing();
    let per_award = 1.0 / mech.funded_fraction();
    let benefit = integrate_uniform(&benefit, h, rule)? * per_award;
    let cost = integrate_uniform(&cost, h, rule)? * per_award;
    let externality = integrate_uniform(&externality, h, rule)? * per_award;

    let out = ContestOutcome {
        benefit,
        cost,
        externality,
        productivity: benefit + externality - cost,
        mechanism: *mech,
        externality_spec: *ext,
    };
    if !(out.benefit.is_finite() && out.cost.is_finite() && out.externality.is_finite()) {
        return Err(Error::NumericalFailure("non-finite planner integral"));
    }
    Ok(out)
}

/// Paylines `0.02, 0.04, ..., 1.00`.
pub fn default_paylines() -> Vec<f64> {
    (1..=50).map(|i| i as f64 / 50.0).collect()
}

/// Solves and evaluates one payline contest.
pub fn evaluate_payline(
    env: &ContestEnvironment,
    payline: f64,
    ext: &ExternalitySpec,
    grid_size: usize,
) -> Result<ContestOutcome> {
    let run = || {
        let mech = Mechanism::payline(payline)?;
        let schedule = solve_bid_schedule(env, &mech, grid_size)?;
        evaluate(env, &mech, &schedule, ext)
    };
    run().map_err(|e| Error::AtPayline {
        payline,
        source: Box::new(e),
    })
}

/// Evaluates each payline in order.
pub fn payline_sweep(
    env: &ContestEnvironment,
    paylines: &[f64],
    ext: &ExternalitySpec,
    grid_size: usize,
) -> Result<Vec<ContestOutcome>> {
    paylines
        .iter()
        .map(|&p| evaluate_payline(env, p, ext, grid_size))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    pub lottery_productivity: f64,
    pub payline_productivity: f64,
    pub relative_gap: f64,
    pub holds: bool,
}

/// Compares a lottery `(line, funded)` against a payline set at the lottery
/// line, with no effort externality.
pub fn lottery_equivalence_check(
    env: &ContestEnvironment,
    line: f64,
    funded: f64,
    tolerance: f64,
    grid_size: usize,
) -> Result<EquivalenceReport> {
    let lottery = Mechanism::lottery(line, funded)?;
    let payline = Mechanism::payline(line)?;
    let ext = ExternalitySpec::None;
    let lot = evaluate(env, &lottery, &solve_bid_schedule(env, &lottery, grid_size)?, &ext)?;
    let pay = evaluate(env, &payline, &solve_bid_schedule(env, &payline, grid_size)?, &ext)?;
    let gap = (lot.productivity - pay.productivity).abs();
    let scale = pay.productivity.abs();
    let relative_gap = if scale > 0.0 { gap / scale } else { gap };
    Ok(EquivalenceReport {
        lottery_productivity: lot.productivity,
        payline_productivity: pay.productivity,
        relative_gap,
        holds: gap <= tolerance * scale,
    })
}

/// Curves of the two Figure-4-style panels: effort externality size (a) and
/// its nature (b).
pub fn figure4_curves(panel: Panel) -> Vec<(&'static str, ExternalitySpec)> {
    match panel {
        Panel::Size => alloc::vec![
            ("none", ExternalitySpec::None),
            ("inverse-cost-r0.5", ExternalitySpec::InverseCost { r: 0.5 }),
            ("inverse-cost-r1", ExternalitySpec::InverseCost { r: 1.0 }),
            ("inverse-cost-r2", ExternalitySpec::InverseCost { r: 2.0 }),
        ],
        Panel::Nature => alloc::vec![
            ("inverse-cost-r2", ExternalitySpec::InverseCost { r: 2.0 }),
            ("partial-completion", ExternalitySpec::PartialCompletion),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    /// Panel (a): no externality against inverse-cost externalities of varying `r`.
    Size,
    /// Panel (b): inverse-cost against partial-completion externalities.
    Nature,
}

/// `max - min` of a curve.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}
