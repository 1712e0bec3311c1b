//! Discrete-applicant Monte Carlo oracle.
//!
//! Each replication draws a finite pool of applicants, assigns equilibrium
//! bids from a solved schedule, ranks applications by bid (empirical rank
//! `r / N`), draws evaluated ranks through the review copula and funds the top
//! of the evaluated ranking, or a uniform draw from it under a lottery.
//!
//! Randomness comes from ChaCha8, seeded with the configured seed; replication
//! `i` uses stream `i`, so replications can run in any order or in parallel
//! and merge to identical results.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{BidSchedule, ContestEnvironment, Mechanism};
use crate::error::{Error, Result};
use crate::planner::ExternalitySpec;
use crate::stats::{ks_uniform, mean_and_se};

pub const MIN_APPLICANTS: usize = 100;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub applicants: usize,
    pub replications: usize,
    pub seed: u64,
    pub environment: ContestEnvironment,
    pub mechanism: Mechanism,
    pub schedule: BidSchedule,
    pub externality: ExternalitySpec,
    /// Number of equal-width true-rank bins for funding frequencies.
    pub rank_bins: usize,
}

impl SimulationConfig {
    /// 10⁵ applicants, 20 replications, seed 0, no externality, 100 rank bins.
    pub fn new(environment: ContestEnvironment, mechanism: Mechanism, schedule: BidSchedule) -> Self {
        Self {
            applicants: 100_000,
            replications: 20,
            seed: 0,
            environment,
            mechanism,
            schedule,
            externality: ExternalitySpec::None,
            rank_bins: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.applicants < MIN_APPLICANTS {
            return Err(Error::invalid("applicants", self.applicants as f64, "need at least 100 applicants"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", 0.0, "need at least one replication"));
        }
        if self.rank_bins == 0 || self.rank_bins > self.applicants {
            return Err(Error::invalid("rank_bins", self.rank_bins as f64, "need between 1 and N bins"));
        }
        self.mechanism.validate()?;
        self.externality.validate()?;
        self.schedule.check_solved_under(&self.environment, &self.mechanism)
    }

    /// Awards and review-line sizes `(⌈f N⌉, ⌈l N⌉)` for a pool of `n`.
    fn counts(&self, n: usize) -> (usize, usize) {
        let cnt = |share: f64| ((share * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
        let line = cnt(self.mechanism.review_line());
        let funded = cnt(self.mechanism.funded_fraction()).min(line);
        (funded, line)
    }
}

fn replication_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Equilibrium pool sorted by bid: `(v, b)` ascending.
fn draw_pool(config: &SimulationConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let q = config.environment.quality();
    let mut pool: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let v = q.quantile_unchecked(rng.gen::<f64>());
            (v, config.schedule.bid_at(v))
        })
        .collect();
    pool.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    pool
}

/// Evaluated ranks for applicants with empirical true ranks `(i + 1) / n_rank`.
fn evaluated_ranks(config: &SimulationConfig, count: usize, n_rank: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = config.environment.noise();
    (0..count)
        .map(|i| {
            let u = (i + 1) as f64 / n_rank as f64;
            let q: f64 = rng.sample(Open01);
            noise.conditional_quantile_unchecked(u, q)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub index: usize,
    pub benefit: f64,
    pub cost: f64,
    pub externality: f64,
    pub productivity: f64,
    pub funded: usize,
    pub bin_applicants: Vec<u64>,
    pub bin_funded: Vec<u64>,
    /// KS distance of the evaluated ranks from Uniform(0, 1).
    pub evaluated_rank_ks: f64,
}

/// Runs replication `index` of `config`.
pub fn simulate_replication(config: &SimulationConfig, index: usize) -> Result<ReplicationResult> {
    config.validate()?;
    let n = config.applicants;
    let mut rng = replication_rng(config.seed, index);
    let pool = draw_pool(config, n, &mut rng);
    let s = evaluated_ranks(config, n, n, &mut rng);
    let (n_funded, n_line) = config.counts(n);

    // top of the evaluated ranking
    let mut order: Vec<usize> = (0..n).collect();
    if n_line < n {
        order.select_nth_unstable_by(n_line - 1, |&a, &b| s[b].total_cmp(&s[a]));
    }
    let line = &mut order[..n_line];
    if n_funded < n_line {
        // partial Fisher-Yates: first n_funded entries become a uniform draw
        for i in 0..n_funded {
            let j = rng.gen_range(i..n_line);
            line.swap(i, j);
        }
    }
    let mut funded = vec![false; n];
    for &i in &line[..n_funded] {
        funded[i] = true;
    }

    let env = &config.environment;
    let ext = &config.externality;
    let bins = config.rank_bins;
    let mut bin_applicants = vec![0u64; bins];
    let mut bin_funded = vec![0u64; bins];
    let (mut benefit, mut cost, mut externality) = (0.0, 0.0, 0.0);
    for (i, &(v, b)) in pool.iter().enumerate() {
        let hit = if funded[i] { 1.0 } else { 0.0 };
        benefit += ext.benefit(env, v, b, hit);
        cost += env.unrecouped_cost(v, b);
        externality += ext.effort_value(env, v, b);
        let bin = i * bins / n;
        bin_applicants[bin] += 1;
        bin_funded[bin] += u64::from(funded[i]);
    }
    let awards = n_funded as f64;
    let (benefit, cost, externality) = (benefit / awards, cost / awards, externality / awards);
    Ok(ReplicationResult {
        index,
        benefit,
        cost,
        externality,
        productivity: benefit + externality - cost,
        funded: n_funded,
        bin_applicants,
        bin_funded,
        evaluated_rank_ks: ks_uniform(&s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error over replications; `None` with a single replication.
    pub se: Option<f64>,
}

impl Estimate {
    fn of(xs: &[f64]) -> Self {
        let (mean, se) = mean_and_se(xs);
        Self { mean, se }
    }

    /// `|mean - target|` measured in standard errors.
    pub fn z_distance(&self, target: f64) -> Option<f64> {
        self.se.map(|se| (self.mean - target).abs() / se)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankBin {
    pub lower: f64,
    pub upper: f64,
    pub applicants: u64,
    pub funded: u64,
}

impl RankBin {
    pub fn frequency(&self) -> f64 {
        self.funded as f64 / self.applicants as f64
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub applicants: usize,
    pub productivity: Estimate,
    pub benefit: Estimate,
    pub cost: Estimate,
    pub externality: Estimate,
    pub replications: Vec<ReplicationResult>,
    pub rank_bins: Vec<RankBin>,
}

/// Folds replication results, sorted by index, into one outcome.
pub fn merge(config: &SimulationConfig, mut results: Vec<ReplicationResult>) -> SimulationOutcome {
    results.sort_by_key(|r| r.index);
    let col = |f: fn(&ReplicationResult) -> f64| -> Vec<f64> { results.iter().map(f).collect() };
    let bins = config.rank_bins;
    let mut rank_bins: Vec<RankBin> = (0..bins)
        .map(|b| RankBin {
            lower: b as f64 / bins as f64,
            upper: (b + 1) as f64 / bins as f64,
            applicants: 0,
            funded: 0,
        })
        .collect();
    for r in &results {
        for (bin, (a, f)) in rank_bins.iter_mut().zip(r.bin_applicants.iter().zip(&r.bin_funded)) {
            bin.applicants += a;
            bin.funded += f;
        }
    }
    SimulationOutcome {
        applicants: config.applicants,
        productivity: Estimate::of(&col(|r| r.productivity)),
        benefit: Estimate::of(&col(|r| r.benefit)),
        cost: Estimate::of(&col(|r| r.cost)),
        externality: Estimate::of(&col(|r| r.externality)),
        replications: results,
        rank_bins,
    }
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulationOutcome> {
    config.validate()?;
    let results = (0..config.replications)
        .map(|i| simulate_replication(config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(config, results))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeCandidate {
    pub bid: f64,
    pub payoff: f64,
    /// Mean payoff gain over bidding the equilibrium bid.
    pub gain: f64,
    /// Standard error of the gain from paired replications.
    pub gain_se: f64,
}

impl ProbeCandidate {
    /// Gain in standard errors; infinite for a positive gain with no noise.
    pub fn gain_z(&self) -> f64 {
        if self.gain_se > 0.0 {
            self.gain / self.gain_se
        } else if self.gain > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub v: f64,
    pub equilibrium_bid: f64,
    pub equilibrium_payoff: f64,
    pub candidates: Vec<ProbeCandidate>,
}

impl ProbeReport {
    pub fn argmax_bid(&self) -> f64 {
        let best = self
            .candidates
            .iter()
            .max_by(|a, b| a.payoff.total_cmp(&b.payoff));
        best.map_or(self.equilibrium_bid, |c| c.bid)
    }

    pub fn max_gain_z(&self) -> f64 {
        self.candidates.iter().map(ProbeCandidate::gain_z).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Expected payoff of a probe applicant of quality `v` placed among
/// `applicants - 1` equilibrium players, at each bid of `bid_grid`.
pub fn best_response_probe(config: &SimulationConfig, v: f64, bid_grid: &[f64]) -> Result<ProbeReport> {
    let mut reports = best_response_probe_many(config, &[v], bid_grid)?;
    Ok(reports.remove(0))
}

/// [`best_response_probe`] for several qualities sharing the same pools.
///
/// Each replication draws the other applicants' bids and evaluated ranks,
/// giving the evaluated-rank cutoff the probe must clear. A bid `x` then
/// places the probe at empirical rank `(1 + #{others below x}) / N`, and its
/// review noise is integrated exactly through the conditional copula. The
/// same pools are used for every candidate bid, so gains are paired.
pub fn best_response_probe_many(
    config: &SimulationConfig,
    qualities: &[f64],
    bid_grid: &[f64],
) -> Result<Vec<ProbeReport>> {
    config.validate()?;
    let env = &config.environment;
    for &v in qualities {
        if !env.quality().contains(v) {
            return Err(Error::domain("v", v, "[0.25, 1]"));
        }
    }
    for &x in bid_grid {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::invalid("bid", x, "bids must be finite and nonnegative"));
        }
    }
    let n = config.applicants;
    let (n_funded, n_line) = config.counts(n);
    let draw_share = n_funded as f64 / n_line as f64;
    let reps = config.replications;

    // per quality: candidate 0 is the equilibrium bid
    let bids: Vec<Vec<f64>> = qualities
        .iter()
        .map(|&v| {
            let mut c = Vec::with_capacity(bid_grid.len() + 1);
            c.push(config.schedule.bid_at(v));
            c.extend_from_slice(bid_grid);
            c
        })
        .collect();
    let mut sum_pay: Vec<Vec<f64>> = bids.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut sum_gain = sum_pay.clone();
    let mut sum_gain2 = sum_pay.clone();

    for r in 0..reps {
        let mut rng = replication_rng(config.seed, r);
        let others = draw_pool(config, n - 1, &mut rng);
        let sorted_bids: Vec<f64> = others.iter().map(|o| o.1).collect();
        let mut s = evaluated_ranks(config, n - 1, n, &mut rng);
        // probe is funded iff fewer than n_line others are evaluated above it
        let cutoff = if n_line < n {
            let idx = n - 1 - n_line;
            let (_, kth, _) = s.select_nth_unstable_by(idx, f64::total_cmp);
            Some(*kth)
        } else {
            None
        };
        let eta = |x: f64| -> f64 {
            match cutoff {
                None => draw_share,
                Some(t) => {
                    let below = sorted_bids.partition_point(|&b| b < x);
                    let u = (below + 1) as f64 / n as f64;
                    draw_share * (1.0 - env.noise().conditional_cdf(u, t))
                }
            }
        };
        for (qi, &v) in qualities.iter().enumerate() {
            let mut base = 0.0;
            for (ci, &x) in bids[qi].iter().enumerate() {
                let pay = v * eta(x) - env.unrecouped_cost(v, x);
                if ci == 0 {
                    base = pay;
                }
                let d = pay - base;
                sum_pay[qi][ci] += pay;
                sum_gain[qi][ci] += d;
                sum_gain2[qi][ci] += d * d;
            }
        }
    }

    let rf = reps as f64;
    Ok(qualities
        .iter()
        .enumerate()
        .map(|(qi, &v)| {
            let candidates: Vec<ProbeCandidate> = bids[qi]
                .iter()
                .enumerate()
                .skip(1)
                .map(|(ci, &bid)| {
                    let gain = sum_gain[qi][ci] / rf;
                    let var = if reps > 1 {
                        ((sum_gain2[qi][ci] - rf * gain * gain) / (rf - 1.0)).max(0.0)
                    } else {
                        0.0
                    };
                    ProbeCandidate {
                        bid,
                        payoff: sum_pay[qi][ci] / rf,
                        gain,
                        gain_se: (var / rf).sqrt(),
                    }
                })
                .collect();
            ProbeReport {
                v,
                equilibrium_bid: bids[qi][0],
                equilibrium_payoff: sum_pay[qi][0] / rf,
                candidates,
            }
        })
        .collect())
}
