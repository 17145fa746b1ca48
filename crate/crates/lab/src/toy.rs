//! One-dimensional toy training runs.

use rand::Rng;

use reluinit::geometry::{is_dead, DataSet};
use reluinit::initstrat::{init_network, NetworkPlan};
use reluinit::netcore::{rmse, train_observed, LabeledData, MlpParams, TrainConfig};
use reluinit::rng::{derive_seed, stream_rng};

use crate::error::LabResult;
use crate::strategies::{Target, ToyInit};

/// Settings of one toy run.
#[derive(Debug, Clone, PartialEq)]
pub struct ToySettings {
    pub width: usize,
    pub samples: usize,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Epochs after which RMSE and knots are recorded; 0 means at init.
    pub snapshots: Vec<usize>,
}

impl Default for ToySettings {
    fn default() -> Self {
        Self { width: 1024, samples: 256, epochs: 250, lr: 1e-3, batch_size: 128, snapshots: vec![0, 10, 50, 250] }
    }
}

/// Knots of the hidden neurons, split by the sign of the input weight.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnotSnapshot {
    pub epoch: usize,
    pub rmse: f64,
    /// Knots of neurons with `a > 0` (active to the right).
    pub positive: Vec<f64>,
    /// Knots of neurons with `a < 0` (active to the left).
    pub negative: Vec<f64>,
}

/// Outcome of one toy run.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyRun {
    /// Training RMSE at init (index 0) and after each epoch.
    pub curve: Vec<f64>,
    pub snapshots: Vec<KnotSnapshot>,
    pub dead_at_init: usize,
    /// Largest residual of the best affine fit to the predictor on the data at init.
    pub init_linear_residual: f64,
    pub final_rmse: f64,
}

/// `n` training inputs uniform on `[0, 1]`, fixed by `seed`.
pub fn toy_inputs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Initial network of width `width` on scalar `inputs`.
pub fn toy_network(init: ToyInit, width: usize, inputs: &DataSet, seed: u64) -> LabResult<MlpParams> {
    let plan = NetworkPlan::uniform(1, &[width], init.init_config());
    Ok(init_network(&plan, Some(inputs), seed)?)
}

/// Number of dead hidden neurons of a shallow network on `inputs`.
pub fn dead_count(params: &MlpParams, inputs: &DataSet, partial0: f64) -> LabResult<usize> {
    let layer = &params.hidden[0];
    let mut dead = 0;
    for i in 0..layer.fan_out() {
        if is_dead(inputs, &layer.neuron(i), partial0)? {
            dead += 1;
        }
    }
    Ok(dead)
}

/// Largest residual of the least-squares affine fit `α + β x` to `ys`.
pub fn affine_residual(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    xs.iter().zip(ys).map(|(x, y)| (y - my - beta * (x - mx)).abs()).fold(0.0, f64::max)
}

fn knots(params: &MlpParams, epoch: usize, rmse: f64) -> KnotSnapshot {
    let layer = &params.hidden[0];
    let mut snap = KnotSnapshot { epoch, rmse, ..Default::default() };
    for i in 0..layer.fan_out() {
        let (a, b) = (layer.weights[i], layer.biases[i]);
        if a > 0.0 {
            snap.positive.push(-b / a);
        } else if a < 0.0 {
            snap.negative.push(-b / a);
        }
    }
    snap
}

/// Trains one network on `target`. Data and init depend on `seed` only.
pub fn run_toy(target: Target, init: ToyInit, settings: &ToySettings, seed: u64) -> LabResult<ToyRun> {
    let xs = toy_inputs(settings.samples, derive_seed(seed, 0));
    let data = LabeledData::from_fn_1d(&xs, |t| target.eval(t))?;
    let params = toy_network(init, settings.width, &data.inputs, derive_seed(seed, 1))?;
    let dead_at_init = dead_count(&params, &data.inputs, 0.0)?;
    let ys: Vec<f64> = xs.iter().map(|&x| params.forward(&[x])).collect::<Result<_, _>>()?;
    let init_linear_residual = affine_residual(&xs, &ys);

    let cfg = TrainConfig {
        lr: settings.lr,
        batch_size: settings.batch_size,
        epochs: settings.epochs,
        patience: None,
        seed: derive_seed(seed, 2),
        ..Default::default()
    };
    let mut curve = Vec::with_capacity(settings.epochs + 1);
    let mut snapshots = Vec::new();
    let mut failure = None;
    let outcome = train_observed(&params, &data, None, &cfg, |epoch, p| match rmse(p, &data) {
        Ok(r) => {
            curve.push(r);
            if settings.snapshots.contains(&epoch) {
                snapshots.push(knots(p, epoch, r));
            }
        }
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let final_rmse = rmse(&outcome.params, &data)?;
    Ok(ToyRun { curve, snapshots, dead_at_init, init_linear_residual, final_rmse })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_residual_of_line_is_zero() {
        let xs = [0.0, 0.25, 0.5, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!(affine_residual(&xs, &ys) < 1e-15);
        assert!((affine_residual(&[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0]) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn he_zero_starts_affine_and_is_reproducible() {
        let settings = ToySettings { width: 16, samples: 64, epochs: 3, snapshots: vec![0, 3], ..Default::default() };
        let a = run_toy(Target::Sine, ToyInit::HeZero, &settings, 5).unwrap();
        let b = run_toy(Target::Sine, ToyInit::HeZero, &settings, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.init_linear_residual < 1e-9);
        assert_eq!(a.curve.len(), 4);
        assert_eq!(a.snapshots.len(), 2);
        assert_eq!(a.snapshots[0].positive.len() + a.snapshots[0].negative.len(), 16);
    }
}
