//! Concentration of the He-scaled weight norm `||A||`, `A ~ N(0, (2/d) I_d)`.
//!
//! `table = thresholds` (default), one row per dimension:
//! `d, mean, gautschi_lo, gautschi_hi, delta_exact, delta_gamma_bound,
//! delta_lipschitz, delta_mc, delta_mc_se`. Each `delta` is the smallest
//! deviation with `P(||A|| >= sqrt(2) + δ) <= level` by the exact tail, the
//! gamma tail bound (`nan` for `d < 3`), the Lipschitz concentration bound
//! and the empirical quantile of `reps` draws.
//!
//! `table = density`: `d, x, density` on `points` grid values in `[0, x_max]`.
//!
//! Keys: `dims`, `level`, `reps`, `points`, `x_max`, `seed`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;

use reluinit::analytics::{lipschitz_deviation, weight_norm_density, weight_norm_stats, weight_norm_tail_bound};
use reluinit::rng::{derive_seed, stream_rng};

use super::table_kind;
use crate::checks::exact_delta;
use crate::config::Config;
use crate::csv::Table;
use crate::error::{LabError, LabResult};
use crate::parallel::map_reps;
use crate::row;

/// Default dimensions: powers of two up to 4096 and a few small values.
pub const DEFAULT_DIMS: [usize; 16] = [1, 2, 3, 4, 5, 8, 10, 16, 20, 32, 64, 128, 256, 512, 1024, 4096];

/// Smallest `δ` where the gamma tail bound drops to `level`.
pub fn gamma_bound_delta(d: usize, level: f64) -> LabResult<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    while weight_norm_tail_bound(d, hi)? > level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if weight_norm_tail_bound(d, mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Empirical `1 - level` quantile of `reps` He-scaled norms.
fn mc_quantile(d: usize, reps: usize, level: f64, seed: u64) -> f64 {
    let sigma = (2.0 / d as f64).sqrt();
    let mut norms = map_reps(reps, |r| {
        let mut rng = stream_rng(seed, r as u64);
        (0..d).map(|_| (sigma * rng.sample::<f64, _>(StandardNormal)).powi(2)).sum::<f64>().sqrt()
    });
    norms.sort_by(f64::total_cmp);
    let k = (((1.0 - level) * reps as f64).ceil() as usize).clamp(1, reps) - 1;
    norms[k]
}

pub fn run(cfg: &Config) -> LabResult<Table> {
    let dims: Vec<usize> = cfg.list("dims", &DEFAULT_DIMS)?;
    if dims.contains(&0) {
        return Err(LabError::Config("dimensions must be positive".into()));
    }
    match table_kind(cfg, &["thresholds", "density"])? {
        "thresholds" => thresholds(cfg, &dims),
        _ => density(cfg, &dims),
    }
}

fn thresholds(cfg: &Config, dims: &[usize]) -> LabResult<Table> {
    let level: f64 = cfg.value("level", 0.01)?;
    let reps: usize = cfg.value("reps", 50_000)?;
    let seed = cfg.seed()?;
    let mut table = Table::new(
        "norm-conc-thresholds",
        &[
            "d",
            "mean",
            "gautschi_lo",
            "gautschi_hi",
            "delta_exact",
            "delta_gamma_bound",
            "delta_lipschitz",
            "delta_mc",
            "delta_mc_se",
        ],
    );
    for &d in dims {
        let sigma = (2.0 / d as f64).sqrt();
        let stats = weight_norm_stats(d, sigma)?;
        let exact = exact_delta(d, level)?;
        let gamma = if d >= 3 { gamma_bound_delta(d, level)? } else { f64::NAN };
        let lipschitz = stats.mean + lipschitz_deviation(d, level)? - SQRT_2;
        let (mc, se) = if reps > 0 {
            let q = mc_quantile(d, reps, level, derive_seed(seed, d as u64));
            let f = weight_norm_density(d, sigma, SQRT_2 + exact)?;
            (q - SQRT_2, (level * (1.0 - level) / reps as f64).sqrt() / f)
        } else {
            (f64::NAN, f64::NAN)
        };
        table.push(row![d, stats.mean, stats.gautschi_lo, stats.gautschi_hi, exact, gamma, lipschitz, mc, se]);
    }
    Ok(table)
}

fn density(cfg: &Config, dims: &[usize]) -> LabResult<Table> {
    let points: usize = cfg.value("points", 401)?;
    let x_max: f64 = cfg.value("x_max", 4.0)?;
    if points < 2 || !(x_max > 0.0) {
        return Err(LabError::Config("need at least 2 points and x_max > 0".into()));
    }
    let mut table = Table::new("norm-conc-density", &["d", "x", "density"]);
    for &d in dims {
        let sigma = (2.0 / d as f64).sqrt();
        for k in 0..points {
            let x = x_max * k as f64 / (points - 1) as f64;
            table.push(row![d, x, weight_norm_density(d, sigma, x)?]);
        }
    }
    Ok(table)
}
