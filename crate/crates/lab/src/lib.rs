//! Experiment harness: configuration, CSV output, the experiment commands
//! and the validation checks shared by `reluinit validate` and the
//! acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod parallel;
pub mod strategies;
pub mod toy;

pub use error::{LabError, LabResult};
