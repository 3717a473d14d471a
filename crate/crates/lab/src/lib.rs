//! Run harness for the bipolar Euler-Poisson relaxation limit.
//!
//! Reads a JSON run configuration, drives the coupled solvers of
//! `bipolar_relax_core`, writes CSV/JSON artifacts and evaluates the
//! acceptance criteria.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod harness;
pub mod output;

pub use config::{ConfigError, RunConfig};
pub use harness::{run_single, run_sweep, HarnessError, RunSummary, SingleRun, SweepOutcome, SweepReport};
