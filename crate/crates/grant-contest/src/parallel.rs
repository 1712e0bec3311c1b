//! Rayon drivers for sweeps and Monte Carlo replications. Results come back
//! in input order whatever the scheduling.

use contest_core::mc::{merge, simulate_replication};
use contest_core::planner::evaluate_payline;
use contest_core::{ContestEnvironment, ContestOutcome, ExternalitySpec, SimulationConfig, SimulationOutcome};
use rayon::prelude::*;

pub fn par_payline_sweep(
    env: &ContestEnvironment,
    paylines: &[f64],
    ext: &ExternalitySpec,
    grid_size: usize,
) -> contest_core::Result<Vec<ContestOutcome>> {
    paylines
        .par_iter()
        .map(|&p| evaluate_payline(env, p, ext, grid_size))
        .collect()
}

pub fn par_simulate(config: &SimulationConfig) -> contest_core::Result<SimulationOutcome> {
    config.validate()?;
    let results = (0..config.replications)
        .into_par_iter()
        .map(|i| simulate_replication(config, i))
        .collect::<contest_core::Result<Vec<_>>>()?;
    Ok(merge(config, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use contest_core::{payline_sweep, simulate, solve_bid_schedule, Mechanism};

    #[test]
    fn matches_sequential() {
        let env = ContestEnvironment::default();
        let ps = [0.1, 0.4, 1.0];
        let ext = ExternalitySpec::InverseCost { r: 2.0 };
        assert_eq!(par_payline_sweep(&env, &ps, &ext, 301).unwrap(), payline_sweep(&env, &ps, &ext, 301).unwrap());

        let mech = Mechanism::payline(0.3).unwrap();
        let schedule = solve_bid_schedule(&env, &mech, 301).unwrap();
        let mut cfg = SimulationConfig::new(env, mech, schedule);
        cfg.applicants = 2000;
        cfg.replications = 6;
        cfg.seed = 11;
        assert_eq!(par_simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    }
}
