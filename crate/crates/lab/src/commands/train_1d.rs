//! Training of shallow scalar networks on toy targets.
//!
//! Every combination of `targets`, `widths` and `inits` is trained for
//! `seeds` seeds on `samples` inputs uniform on `[0, 1]` (least squares,
//! Adam). The `table` key selects the output:
//!
//! - `curves` (default): `target, width, init, seed, epoch, rmse` for epoch 0 to `epochs`.
//! - `knots`: `target, width, init, epoch, bin_lo, bin_hi, count_pos, count_neg`,
//!   histograms of knots over all seeds at each snapshot epoch, split by the
//!   sign of the input weight (`pos`: active to the right).
//! - `summary`: `target, width, init, seed, dead_at_init, init_linear_residual, final_rmse`.
//!
//! Keys: `targets`, `widths`, `inits`, `seeds`, `samples`, `epochs`, `lr`,
//! `batch_size`, `snapshots`, `bins`, `knot_min`, `knot_max`, `seed`.

use reluinit::rng::derive_seed;

use super::table_kind;
use crate::config::Config;
use crate::csv::Table;
use crate::error::{LabError, LabResult};
use crate::parallel::try_map_reps;
use crate::row;
use crate::strategies::{Target, ToyInit};
use crate::toy::{run_toy, ToyRun, ToySettings};

fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &v in values {
        if v >= lo && v < hi {
            counts[(((v - lo) / (hi - lo)) * bins as f64) as usize % bins] += 1;
        } else if v == hi {
            counts[bins - 1] += 1;
        }
    }
    counts
}

pub fn run(cfg: &Config) -> LabResult<Table> {
    let kind = table_kind(cfg, &["curves", "knots", "summary"])?;
    let targets: Vec<Target> =
        cfg.names("targets", &Target::ALL.map(|t| t.name())).iter().map(|s| s.parse()).collect::<LabResult<_>>()?;
    let inits: Vec<ToyInit> =
        cfg.names("inits", &ToyInit::ALL.map(|t| t.name())).iter().map(|s| s.parse()).collect::<LabResult<_>>()?;
    let widths: Vec<usize> = cfg.list("widths", &[16, 128, 1024])?;
    let seeds: usize = cfg.value("seeds", 50)?;
    let epochs: usize = cfg.value("epochs", 250)?;
    let mut snapshots: Vec<usize> = cfg.list("snapshots", &[10, 50, 250])?;
    snapshots.retain(|&e| e <= epochs);
    let settings = |width| -> LabResult<ToySettings> {
        Ok(ToySettings {
            width,
            samples: cfg.value("samples", 256)?,
            epochs,
            lr: cfg.value("lr", 1e-3)?,
            batch_size: cfg.value("batch_size", 128)?,
            snapshots: snapshots.clone(),
        })
    };
    let bins: usize = cfg.value("bins", 60)?;
    let knot_min: f64 = cfg.value("knot_min", -1.0)?;
    let knot_max: f64 = cfg.value("knot_max", 2.0)?;
    if bins == 0 || !(knot_min < knot_max) || widths.contains(&0) {
        return Err(LabError::Config("need bins > 0, knot_min < knot_max and positive widths".into()));
    }
    let base = cfg.seed()?;

    let mut table = match kind {
        "curves" => Table::new("train-1d-curves", &["target", "width", "init", "seed", "epoch", "rmse"]),
        "knots" => Table::new(
            "train-1d-knots",
            &["target", "width", "init", "epoch", "bin_lo", "bin_hi", "count_pos", "count_neg"],
        ),
        _ => Table::new(
            "train-1d-summary",
            &["target", "width", "init", "seed", "dead_at_init", "init_linear_residual", "final_rmse"],
        ),
    };
    for (ti, &target) in targets.iter().enumerate() {
        for &width in &widths {
            let s = settings(width)?;
            for &init in &inits {
                // Data and init depend on (target, seed) only, so both inits see the same samples.
                let runs: Vec<ToyRun> =
                    try_map_reps(seeds, |r| run_toy(target, init, &s, derive_seed(derive_seed(base, ti as u64), r as u64)))?;
                push_rows(&mut table, kind, target, width, init, &runs, (bins, knot_min, knot_max));
            }
        }
    }
    Ok(table)
}

fn push_rows(
    table: &mut Table,
    kind: &str,
    target: Target,
    width: usize,
    init: ToyInit,
    runs: &[ToyRun],
    (bins, lo, hi): (usize, f64, f64),
) {
    match kind {
        "curves" => {
            for (seed, run) in runs.iter().enumerate() {
                for (epoch, &r) in run.curve.iter().enumerate() {
                    table.push(row![target.name(), width, init.name(), seed, epoch, r]);
                }
            }
        }
        "knots" => {
            let epochs: Vec<usize> = runs.first().map(|r| r.snapshots.iter().map(|s| s.epoch).collect()).unwrap_or_default();
            for (k, &epoch) in epochs.iter().enumerate() {
                let pos: Vec<f64> = runs.iter().flat_map(|r| r.snapshots[k].positive.iter().copied()).collect();
                let neg: Vec<f64> = runs.iter().flat_map(|r| r.snapshots[k].negative.iter().copied()).collect();
                let (hp, hn) = (histogram(&pos, lo, hi, bins), histogram(&neg, lo, hi, bins));
                for b in 0..bins {
                    let b_lo = lo + (hi - lo) * b as f64 / bins as f64;
                    let b_hi = lo + (hi - lo) * (b + 1) as f64 / bins as f64;
                    table.push(row![target.name(), width, init.name(), epoch, b_lo, b_hi, hp[b], hn[b]]);
                }
            }
        }
        _ => {
            for (seed, run) in runs.iter().enumerate() {
                table.push(row![
                    target.name(),
                    width,
                    init.name(),
                    seed,
                    run.dead_at_init,
                    run.init_linear_residual,
                    run.final_rmse
                ]);
            }
        }
    }
}
