//! Experiment harness for `mirror-polyak`: TOML configs, reference optima,
//! CSV traces and the `solve`/`compare`/`oracle`/`certify` commands behind
//! the `mirror-polyak` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod config;
pub mod error;
pub mod experiment;
pub mod reference;
pub mod trace;

pub use config::{parse_config, ExperimentConfig, PolicyKind, PolicySpec};
pub use error::{HarnessError, Result};
pub use experiment::{certify, compare, oracle, solve, CertifyReport, Experiment, RunOutcome};
pub use reference::{compute_reference, ReferenceMethod, ReferenceOptimum};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
