//! Neuron-state probabilities over a grid of spread ratios `ρ`.
//!
//! Columns: `strategy, rho, p_fa, p_sa, p_ia` (analytic), `mc_fa, mc_sa,
//! mc_ia` (frequencies over `neurons` sampled neurons) and `se_fa, se_sa,
//! se_ia` (binomial standard errors of the analytic values).
//!
//! Keys: `strategies`, `rho` (list), `x_min`, `x_max`, `neurons`, `seed`.

use reluinit::geometry::{classify_1d, DataSet, NeuronState};
use reluinit::initstrat::init_layer;
use reluinit::rng::derive_seed;

use crate::config::Config;
use crate::csv::Table;
use crate::error::LabResult;
use crate::parallel::try_map_reps;
use crate::row;
use crate::strategies::SweepStrategy;

/// Default grid `0.25, 0.5, ..., 15`.
pub fn default_rho_grid() -> Vec<f64> {
    (1..=60).map(|k| 0.25 * k as f64).collect()
}

pub fn run(cfg: &Config) -> LabResult<Table> {
    let strategies: Vec<SweepStrategy> =
        cfg.names("strategies", &SweepStrategy::ALL.map(|s| s.name())).iter().map(|s| s.parse()).collect::<LabResult<_>>()?;
    let rhos = cfg.list("rho", &default_rho_grid())?;
    let x_min = cfg.value("x_min", 0.0)?;
    let x_max = cfg.value("x_max", 1.0)?;
    let neurons: usize = cfg.value("neurons", 10_000)?;
    let seed = cfg.seed()?;
    let data = DataSet::from_1d(&[x_min, x_max])?;

    let jobs: Vec<(SweepStrategy, f64)> = strategies.iter().flat_map(|&s| rhos.iter().map(move |&r| (s, r))).collect();
    let rows = try_map_reps(jobs.len(), |j| -> LabResult<_> {
        let (strategy, rho) = jobs[j];
        let p = strategy.state_probabilities(rho, x_min, x_max)?;
        let p = [p.p_fully_active, p.p_semi_active, p.p_inactive];
        let mut mc = [f64::NAN; 3];
        if neurons > 0 {
            let layer = init_layer(&strategy.init_config(rho)?, 1, neurons, None, derive_seed(seed, j as u64))?;
            let mut counts = [0usize; 3];
            for i in 0..neurons {
                counts[match classify_1d(&data, &layer.neuron(i))? {
                    NeuronState::FullyActive => 0,
                    NeuronState::SemiActive => 1,
                    NeuronState::Inactive => 2,
                }] += 1;
            }
            mc = counts.map(|c| c as f64 / neurons as f64);
        }
        let se = p.map(|q| if neurons > 0 { (q * (1.0 - q) / neurons as f64).sqrt() } else { f64::NAN });
        Ok(row![strategy.name(), rho, p[0], p[1], p[2], mc[0], mc[1], mc[2], se[0], se[1], se[2]])
    })?;

    let mut table = Table::new(
        "states-sweep",
        &["strategy", "rho", "p_fa", "p_sa", "p_ia", "mc_fa", "mc_sa", "mc_ia", "se_fa", "se_sa", "se_ia"],
    );
    for r in rows {
        table.push(r);
    }
    Ok(table)
}
