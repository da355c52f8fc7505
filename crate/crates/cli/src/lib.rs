//! Scenario files, the runner behind the `madelung` binary, and series output.

pub mod bundled;
pub mod runner;
pub mod scenario;
pub mod series;

pub use runner::{load, run, run_all, run_suite, RunError, RunOptions, RunOutcome, SuiteOutcome};
pub use scenario::{parse_scenario, Scenario};
