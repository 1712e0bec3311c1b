//! Seeded synthetic survey panels.
//!
//! Research hours are Poisson with log mean
//! `alpha + beta_f ln F + beta_o ln O + gamma x`, where `x` is a binary
//! covariate. Zero-hour responses are injected at configurable rates so the
//! sample restrictions have something to drop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};

use crate::output::{num, CsvTable};
use crate::survey::{SurveyRecord, REQUIRED_COLUMNS};

pub const FIELDS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub records: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta_f: f64,
    pub beta_o: f64,
    /// Coefficient on the `senior` covariate.
    pub gamma: f64,
    pub zero_research: f64,
    pub zero_other: f64,
    pub zero_fundraising: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            records: 4388,
            seed: 0,
            alpha: 3.2,
            beta_f: 0.05,
            beta_o: -0.1,
            gamma: 0.1,
            zero_research: 0.046,
            zero_other: 0.0122,
            zero_fundraising: 0.3615,
        }
    }
}

impl SynthConfig {
    /// Log mean of research hours for given fundraising, other time and
    /// covariate.
    pub fn log_mean(&self, f: f64, o: f64, senior: f64) -> f64 {
        self.alpha + self.beta_f * f.ln() + self.beta_o * o.ln() + self.gamma * senior
    }
}

pub fn generate(cfg: &SynthConfig) -> Vec<SurveyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // medians about 5 and 20 hours, $0.25M
    let fundraising = LogNormal::new(5.0_f64.ln(), 0.7).expect("valid");
    let other = LogNormal::new(20.0_f64.ln(), 0.5).expect("valid");
    let grant = LogNormal::new(0.25_f64.ln(), 0.9).expect("valid");
    (0..cfg.records)
        .map(|i| {
            let field = format!("field{:02}", rng.gen_range(1..=FIELDS));
            let senior = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
            let mut f = (fundraising.sample(&mut rng) * 4.0).round() / 4.0;
            let mut o = (other.sample(&mut rng) * 4.0).round() / 4.0;
            f = f.max(0.25);
            o = o.max(0.25);
            let g = grant.sample(&mut rng);
            let guaranteed = g * rng.gen_range(0.0..0.5);
            let mu = cfg.log_mean(f, o, senior).exp();
            let mut r = Poisson::new(mu).expect("positive mean").sample(&mut rng);
            if rng.gen_bool(cfg.zero_research) {
                r = 0.0;
            }
            if rng.gen_bool(cfg.zero_other) {
                o = 0.0;
            }
            if rng.gen_bool(cfg.zero_fundraising) {
                f = 0.0;
            }
            SurveyRecord {
                id: format!("r{:05}", i + 1),
                field,
                hrs_research: r,
                hrs_fundraising: f,
                hrs_other: o,
                grant_expected: g,
                grant_guaranteed: guaranteed,
                covariates: vec![("senior".to_string(), senior)],
            }
        })
        .collect()
}

pub fn to_csv(records: &[SurveyRecord]) -> String {
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    if let Some(first) = records.first() {
        header.extend(first.covariates.iter().map(|(n, _)| n.as_str()));
    }
    let mut t = CsvTable::new(&header);
    for r in records {
        let mut row = vec![
            r.id.clone(),
            r.field.clone(),
            num(r.hrs_research),
            num(r.hrs_fundraising),
            num(r.hrs_other),
            num(r.grant_expected),
            num(r.grant_guaranteed),
        ];
        row.extend(r.covariates.iter().map(|(_, v)| num(*v)));
        t.row(row);
    }
    t.into_string()
}
