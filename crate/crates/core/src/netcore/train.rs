//! Mini-batch Adam training with optional early stopping.

use rand::seq::SliceRandom;

use super::{backprop, empirical_risk, LabeledData, Loss, MlpParams, Partial0};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Optimizer and schedule settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub loss: Loss,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without improvement of the held-out risk before stopping.
    /// Only used when validation data is supplied.
    pub patience: Option<usize>,
    pub seed: u64,
    pub partial0: Partial0,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: Loss::LeastSquares,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 128,
            epochs: 50,
            patience: Some(5),
            seed: 0,
            partial0: Partial0::default(),
        }
    }
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Final parameters (the best held-out ones if early stopping triggered).
    pub params: MlpParams,
    /// Training risk after each completed epoch.
    pub history: Vec<f64>,
    /// Held-out risk after each completed epoch, empty without validation data.
    pub validation_history: Vec<f64>,
    pub stopped_early: bool,
}

/// Trains on `data` without held-out data.
pub fn train(params: &MlpParams, data: &LabeledData, config: &TrainConfig) -> Result<TrainOutcome> {
    train_observed(params, data, None, config, |_, _| {})
}

/// Trains on `data`, tracking `validation` for early stopping.
pub fn train_with_validation(
    params: &MlpParams,
    data: &LabeledData,
    validation: &LabeledData,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_observed(params, data, Some(validation), config, |_, _| {})
}

/// Trains and calls `observer(epoch, params)` after every epoch (1-based)
/// and once with epoch 0 before the first update.
pub fn train_observed<F: FnMut(usize, &MlpParams)>(
    params: &MlpParams,
    data: &LabeledData,
    validation: Option<&LabeledData>,
    config: &TrainConfig,
    mut observer: F,
) -> Result<TrainOutcome> {
    if config.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    if !(config.lr >= 0.0) || !(0.0..1.0).contains(&config.beta1) || !(0.0..1.0).contains(&config.beta2) {
        return Err(Error::InvalidParameter("invalid Adam hyper-parameters".into()));
    }
    let mut current = params.clone();
    let mut flat = current.to_flat();
    let mut m = vec![0.0; flat.len()];
    let mut v = vec![0.0; flat.len()];
    let mut step = 0_i32;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = stream_rng(config.seed, 0);

    let mut outcome = TrainOutcome {
        params: current.clone(),
        history: Vec::with_capacity(config.epochs),
        validation_history: Vec::new(),
        stopped_early: false,
    };
    let mut best: Option<(f64, MlpParams)> = None;
    let mut stale = 0;
    observer(0, &current);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch_idx in order.chunks(config.batch_size) {
            let batch = data.select(batch_idx)?;
            let grad = backprop(&current, &batch, config.loss, config.partial0)?.to_flat();
            step += 1;
            let c1 = 1.0 - config.beta1.powi(step);
            let c2 = 1.0 - config.beta2.powi(step);
            for k in 0..flat.len() {
                let g = grad[k];
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                flat[k] -= config.lr * m_hat / (v_hat.sqrt() + config.epsilon);
            }
            current.set_flat(&flat)?;
        }
        outcome.history.push(empirical_risk(&current, data, config.loss)?);
        observer(epoch, &current);

        if let Some(val) = validation {
            let risk = empirical_risk(&current, val, config.loss)?;
            outcome.validation_history.push(risk);
            if best.as_ref().is_none_or(|(b, _)| risk < *b) {
                best = Some((risk, current.clone()));
                stale = 0;
            } else {
                stale += 1;
            }
            if config.patience.is_some_and(|p| stale >= p) {
                outcome.stopped_early = true;
                break;
            }
        }
    }
    outcome.params = match (outcome.stopped_early, best) {
        (true, Some((_, p))) => p,
        _ => current,
    };
    Ok(outcome)
}
