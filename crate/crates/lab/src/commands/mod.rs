//! Experiment commands. Each turns a [`Config`](crate::config::Config) into
//! a CSV [`Table`](crate::csv::Table) or, for `validate`, a check report.

pub mod knot_density;
pub mod norm_conc;
pub mod random_functions;
pub mod states_sweep;
pub mod train_1d;
pub mod validate;

use crate::config::Config;
use crate::csv::Table;
use crate::error::{LabError, LabResult};

/// Reads the `table` key, checking it against the allowed names.
pub(crate) fn table_kind<'a>(cfg: &Config, allowed: &[&'a str]) -> LabResult<&'a str> {
    let want = cfg.get("table").unwrap_or(allowed[0]);
    allowed
        .iter()
        .copied()
        .find(|k| *k == want)
        .ok_or_else(|| LabError::Config(format!("unknown table '{want}', expected one of {}", allowed.join("|"))))
}

/// Runs a table-producing command by name.
pub fn run_table(command: &str, cfg: &Config) -> LabResult<Table> {
    match command {
        "states-sweep" => states_sweep::run(cfg),
        "knot-density" => knot_density::run(cfg),
        "norm-conc" => norm_conc::run(cfg),
        "train-1d" => train_1d::run(cfg),
        "random-functions" => random_functions::run(cfg),
        other => Err(LabError::Config(format!("unknown command '{other}'"))),
    }
}
