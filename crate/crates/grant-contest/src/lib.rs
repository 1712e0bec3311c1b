//! Command-line tool, file formats and survey tooling around `contest-core`.
//!
//! * [`survey`] loads time-use survey CSVs, applies the sample restrictions,
//!   builds the leave-one-out competition instrument and summary tables.
//! * [`poisson`] fits log-link Poisson regressions by IRLS with robust
//!   (sandwich) standard errors.
//! * [`parallel`] runs payline sweeps and Monte Carlo replications on rayon.
//! * [`cli`] is the `grant-contest` binary.

pub mod cli;
pub mod config;
mod error;
pub mod output;
pub mod parallel;
pub mod poisson;
pub mod report;
pub mod spline;
pub mod survey;
pub mod synth;

pub use error::{AppError, SurveyError};
