//! Symmetric equilibria and planner-side productivity of grant funding
//! contests with effort externalities.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs: the closed-form Tullock model, the idea-quality distribution
//! and Clayton review noise, the equilibrium bid solver for payline and
//! lottery mechanisms, per-award planner metrics, and a seeded Monte Carlo
//! oracle used to cross-check all of the above with discrete applicant pools.
//!
//! IO, file formats and the command-line tool live in the `grant-contest`
//! crate.

#![no_std]
// `Float` supplies f64 math under no_std; rustc reports those imports as
// unused because core's own float methods exist as unstable items.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod closed_form;
pub mod equilibrium;
mod error;
pub mod mc;
pub mod planner;
pub mod quadrature;
pub mod quality;
pub mod stats;

pub use closed_form::SimpleContestParams;
pub use equilibrium::{
    applicant_value, funding_probability, solve_bid_schedule, BidRow, BidSchedule,
    ContestEnvironment, Mechanism, DEFAULT_GRID_SIZE, MIN_GRID_SIZE,
};
pub use error::{Error, Result};
pub use mc::{best_response_probe, simulate, SimulationConfig, SimulationOutcome};
pub use planner::{
    default_paylines, evaluate, lottery_equivalence_check, payline_sweep, ContestOutcome,
    ExternalitySpec,
};
pub use quality::{ClaytonCopula, QualityDistribution};
