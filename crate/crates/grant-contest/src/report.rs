//! Tables behind the `figure4` and `mc-check` subcommands.

use contest_core::planner::{figure4_curves, spread, Panel};
use contest_core::stats::spearman;
use contest_core::{
    evaluate, funding_probability, solve_bid_schedule, ContestEnvironment, ContestOutcome, ExternalitySpec,
    Mechanism, SimulationConfig,
};

use crate::output::{num, CsvTable};
use crate::parallel::{par_payline_sweep, par_simulate};

pub const SWEEP_HEADER: [&str; 7] = ["payline", "kind", "r", "benefit", "cost", "externality", "productivity"];
pub const FIGURE4_HEADER: [&str; 3] = ["payline", "curve", "productivity"];
pub const MC_HEADER: [&str; 7] = ["payline", "kind", "r", "quantity", "analytic", "empirical", "std_error"];

pub fn sweep_csv(outcomes: &[ContestOutcome]) -> String {
    let mut t = CsvTable::new(&SWEEP_HEADER);
    for o in outcomes {
        t.row([
            num(o.mechanism.review_line()),
            o.externality_spec.kind().to_string(),
            o.externality_spec.r().map(num).unwrap_or_default(),
            num(o.benefit),
            num(o.cost),
            num(o.externality),
            num(o.productivity),
        ]);
    }
    t.into_string()
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub name: &'static str,
    pub outcomes: Vec<ContestOutcome>,
}

impl Curve {
    pub fn productivity(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.productivity).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Figure4 {
    pub panel: Panel,
    pub paylines: Vec<f64>,
    pub curves: Vec<Curve>,
}

impl Figure4 {
    pub fn compute(
        env: &ContestEnvironment,
        panel: Panel,
        paylines: &[f64],
        grid_size: usize,
    ) -> contest_core::Result<Self> {
        let curves = figure4_curves(panel)
            .into_iter()
            .map(|(name, ext)| {
                par_payline_sweep(env, paylines, &ext, grid_size).map(|outcomes| Curve { name, outcomes })
            })
            .collect::<contest_core::Result<Vec<_>>>()?;
        Ok(Self {
            panel,
            paylines: paylines.to_vec(),
            curves,
        })
    }

    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    /// Spearman correlation between the first two curves.
    pub fn rank_correlation(&self) -> f64 {
        spearman(&self.curves[0].productivity(), &self.curves[1].productivity())
    }

    /// `(name, max - min)` of each curve.
    pub fn spreads(&self) -> Vec<(&'static str, f64)> {
        self.curves.iter().map(|c| (c.name, spread(&c.productivity()))).collect()
    }

    /// One block of rows per curve.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&FIGURE4_HEADER);
        for c in &self.curves {
            for (p, o) in self.paylines.iter().zip(&c.outcomes) {
                t.row([num(*p), c.name.to_string(), num(o.productivity)]);
            }
        }
        t.into_string()
    }

    /// Human-readable diagnostics for stderr.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (name, sp) in self.spreads() {
            s.push_str(&format!("spread {name}: {sp:.6}\n"));
        }
        if self.panel == Panel::Nature {
            s.push_str(&format!("spearman: {:.6}\n", self.rank_correlation()));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRow {
    pub payline: f64,
    pub kind: &'static str,
    pub r: Option<f64>,
    pub quantity: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: Option<f64>,
}

impl McRow {
    /// `|analytic - empirical|` in standard errors.
    pub fn z(&self) -> Option<f64> {
        self.std_error.map(|se| (self.analytic - self.empirical).abs() / se)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub applicants: usize,
    pub replications: usize,
    pub seed: u64,
    pub grid_size: usize,
}

/// Analytic planner integrals against the discrete simulation, plus the
/// top-percentile funding frequency, for every payline and externality.
pub fn mc_check(
    env: &ContestEnvironment,
    paylines: &[f64],
    externalities: &[ExternalitySpec],
    settings: McSettings,
) -> contest_core::Result<Vec<McRow>> {
    let mut rows = Vec::new();
    for &p in paylines {
        let mech = Mechanism::payline(p)?;
        let schedule = solve_bid_schedule(env, &mech, settings.grid_size)?;
        for ext in externalities {
            let analytic = evaluate(env, &mech, &schedule, ext)?;
            let mut cfg = SimulationConfig::new(*env, mech, schedule.clone());
            cfg.applicants = settings.applicants;
            cfg.replications = settings.replications;
            cfg.seed = settings.seed;
            cfg.externality = *ext;
            let sim = par_simulate(&cfg)?;
            let row = |quantity, analytic, est: contest_core::mc::Estimate| McRow {
                payline: p,
                kind: ext.kind(),
                r: ext.r(),
                quantity,
                analytic,
                empirical: est.mean,
                std_error: est.se,
            };
            rows.push(row("productivity", analytic.productivity, sim.productivity));
            rows.push(row("benefit", analytic.benefit, sim.benefit));
            rows.push(row("cost", analytic.cost, sim.cost));
            rows.push(row("externality", analytic.externality, sim.externality));
            let top = sim.rank_bins.last().expect("at least one bin");
            let freq = top.frequency();
            rows.push(McRow {
                payline: p,
                kind: ext.kind(),
                r: ext.r(),
                quantity: "top_bin_funding",
                analytic: funding_probability(env, &mech, top.midpoint())?,
                empirical: freq,
                std_error: Some((freq * (1.0 - freq) / top.applicants as f64).sqrt()),
            });
        }
    }
    Ok(rows)
}

pub fn mc_csv(rows: &[McRow]) -> String {
    let mut t = CsvTable::new(&MC_HEADER);
    for r in rows {
        t.row([
            num(r.payline),
            r.kind.to_string(),
            r.r.map(num).unwrap_or_default(),
            r.quantity.to_string(),
            num(r.analytic),
            num(r.empirical),
            r.std_error.map(num).unwrap_or_default(),
        ]);
    }
    t.into_string()
}
