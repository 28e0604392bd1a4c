//! Command-line driver: problem runners, sweeps with log-log slope fits,
//! atomic CSV output and the acceptance suite.

pub mod config;
pub mod error;
pub mod problems;
pub mod suite;
pub mod sweep;

pub use config::Params;
pub use error::{HarnessError, Result};
pub use problems::{build_problem, run_problem, Axis, Cell, Problem, Summary, PROBLEM_IDS};
pub use suite::{run_acceptance, CriterionResult, SuiteOptions, SuiteReport, EXPECTED_FAIL};
pub use sweep::{
    fit_slope, parse_values, run_sweep, write_atomic, ConvergenceReport, Row, SlopeFit, SweepSpec, CSV_HEADER,
};
