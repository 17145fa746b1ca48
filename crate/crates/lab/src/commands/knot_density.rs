//! Density and CDF of the ratio `b / a` (the negated knot) on a `z` grid.
//!
//! Columns: `strategy, rho, z, pdf, cdf`.
//!
//! Keys: `pairs` (list of `strategy:rho`), `z_min`, `z_max`, `points`.

use reluinit::ratiodist::RatioPair;

use crate::config::Config;
use crate::csv::Table;
use crate::error::{LabError, LabResult};
use crate::row;
use crate::strategies::SweepStrategy;

/// Default pairs: every continuous strategy at `ρ = 1`.
pub const DEFAULT_PAIRS: [&str; 5] =
    ["dirac-normal:1", "dirac-uniform:1", "normal-normal:1", "uniform-asym:1", "uniform-sym:1"];

fn parse_pair(spec: &str) -> LabResult<(SweepStrategy, f64)> {
    let (name, rho) = spec
        .split_once(':')
        .ok_or_else(|| LabError::Config(format!("pair '{spec}' must look like strategy:rho")))?;
    let rho = rho.trim().parse().map_err(|_| LabError::Config(format!("bad rho in '{spec}'")))?;
    Ok((name.trim().parse()?, rho))
}

pub fn run(cfg: &Config) -> LabResult<Table> {
    let z_min: f64 = cfg.value("z_min", -5.0)?;
    let z_max: f64 = cfg.value("z_max", 5.0)?;
    let points: usize = cfg.value("points", 1001)?;
    if !(z_min < z_max) || points < 2 {
        return Err(LabError::Config("need z_min < z_max and at least 2 points".into()));
    }
    let mut table = Table::new("knot-density", &["strategy", "rho", "z", "pdf", "cdf"]);
    for spec in cfg.names("pairs", &DEFAULT_PAIRS) {
        let (strategy, rho) = parse_pair(&spec)?;
        if strategy == SweepStrategy::ZeroBias {
            return Err(LabError::Config("zero-bias knots have no density".into()));
        }
        let (bias, weight) = strategy.laws(rho)?;
        let pair = RatioPair::new(bias, weight)?;
        for k in 0..points {
            let z = z_min + (z_max - z_min) * k as f64 / (points - 1) as f64;
            table.push(row![strategy.name(), rho, z, pair.pdf(z)?, pair.cdf(z)]);
        }
    }
    Ok(table)
}
