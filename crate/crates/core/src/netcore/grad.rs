//! Gradients of the empirical risk.

use super::{Loss, MlpParams, LabeledData, Partial0};
use crate::error::{Error, Result};

/// Gradient of a one-hidden-layer scalar network
/// `g(x) = sum_i w_i max(0, a_i x + b_i) + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient1d {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    pub c: f64,
}

fn check_inputs(params: &MlpParams, data: &LabeledData) -> Result<()> {
    if data.inputs.dim() != params.input_dim() {
        return Err(Error::ShapeMismatch { expected: params.input_dim(), actual: data.inputs.dim() });
    }
    Ok(())
}

/// Gradient of the empirical risk of a shallow scalar network, assembled
/// neuron by neuron from the samples on the active side of each knot.
///
/// Samples lying exactly on a knot contribute with weight `partial0`.
pub fn grad_1d_closed_form(
    params: &MlpParams,
    data: &LabeledData,
    loss: Loss,
    partial0: Partial0,
) -> Result<Gradient1d> {
    if params.hidden.len() != 1 {
        return Err(Error::InvalidParameter("closed-form gradient needs exactly one hidden layer".into()));
    }
    if params.input_dim() != 1 {
        return Err(Error::ShapeMismatch { expected: 1, actual: params.input_dim() });
    }
    check_inputs(params, data)?;
    let layer = &params.hidden[0];
    let n = data.len() as f64;
    let d0 = partial0.value();
    let xs: Vec<f64> = data.inputs.points().map(|p| p[0]).collect();
    let lp: Vec<f64> = xs
        .iter()
        .zip(&data.labels)
        .map(|(&x, &y)| loss.derivative(y, params.forward_unchecked(&[x])))
        .collect();
    let m = layer.fan_out();
    let mut grad = Gradient1d { a: vec![0.0; m], b: vec![0.0; m], w: vec![0.0; m], c: 0.0 };
    for i in 0..m {
        let (a, b, w) = (layer.weights[i], layer.biases[i], params.output_weights[i]);
        if a != 0.0 {
            let knot = -b / a;
            let active = |x: f64| if a < 0.0 { x < knot } else { x > knot };
            let (mut s_lx, mut s_l, mut s_lh, mut edge) = (0.0, 0.0, 0.0, 0.0);
            for (&x, &l) in xs.iter().zip(&lp) {
                if active(x) {
                    s_lx += l * x;
                    s_l += l;
                    s_lh += l * (a * x + b);
                } else if x == knot {
                    edge += l;
                }
            }
            grad.a[i] = w / n * s_lx + d0 * w * knot / n * edge;
            grad.b[i] = w / n * s_l + d0 * w / n * edge;
            grad.w[i] = s_lh / n;
        } else {
            let factor = if b > 0.0 {
                1.0
            } else if b < 0.0 {
                0.0
            } else {
                d0
            };
            let s_lx: f64 = xs.iter().zip(&lp).map(|(x, l)| l * x).sum();
            let s_l: f64 = lp.iter().sum();
            grad.a[i] = factor * w / n * s_lx;
            grad.b[i] = factor * w / n * s_l;
            grad.w[i] = b.max(0.0) / n * s_l;
        }
    }
    grad.c = lp.iter().sum::<f64>() / n;
    Ok(grad)
}

/// Reverse-mode gradient of the empirical risk for a network of any depth.
///
/// The result has the same layout as the parameters. At pre-activations that
/// are exactly zero the ReLU derivative is `partial0`.
pub fn backprop(params: &MlpParams, batch: &LabeledData, loss: Loss, partial0: Partial0) -> Result<MlpParams> {
    check_inputs(params, batch)?;
    let depth = params.hidden.len();
    let mut grad = params.clone();
    grad.set_flat(&vec![0.0; params.num_params()])?;
    let n = batch.len() as f64;

    // Per-sample buffers: activations h_0..h_L and pre-activations z_1..z_L.
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
    acts.push(vec![0.0; params.input_dim()]);
    let mut pres: Vec<Vec<f64>> = Vec::with_capacity(depth);
    for layer in &params.hidden {
        acts.push(vec![0.0; layer.fan_out()]);
        pres.push(vec![0.0; layer.fan_out()]);
    }
    let max_width = params.hidden.iter().map(|l| l.fan_out().max(l.fan_in())).max().unwrap_or(1);
    let mut back = vec![0.0; max_width];
    let mut next_back = vec![0.0; max_width];

    for (x, &y) in batch.inputs.points().zip(&batch.labels) {
        acts[0].copy_from_slice(x);
        for (l, layer) in params.hidden.iter().enumerate() {
            let (lower, upper) = acts.split_at_mut(l + 1);
            layer.pre_activations(&lower[l], &mut pres[l]);
            for (h, &z) in upper[0].iter_mut().zip(&pres[l]) {
                *h = z.max(0.0);
            }
        }
        let mut g = 0.0;
        for (w, h) in params.output_weights.iter().zip(&acts[depth]) {
            g += w * h;
        }
        g += params.output_bias;
        let delta = loss.derivative(y, g) / n;

        grad.output_bias += delta;
        for (gw, h) in grad.output_weights.iter_mut().zip(&acts[depth]) {
            *gw += delta * h;
        }
        let top = params.hidden[depth - 1].fan_out();
        for i in 0..top {
            back[i] = delta * params.output_weights[i] * partial0.relu_derivative(pres[depth - 1][i]);
        }
        for l in (0..depth).rev() {
            let layer = &params.hidden[l];
            let (fan_in, fan_out) = (layer.fan_in(), layer.fan_out());
            let gl = &mut grad.hidden[l];
            for i in 0..fan_out {
                let bi = back[i];
                gl.biases[i] += bi;
                let row = &mut gl.weights[i * fan_in..(i + 1) * fan_in];
                for (gw, h) in row.iter_mut().zip(&acts[l]) {
                    *gw += bi * h;
                }
            }
            if l > 0 {
                for k in 0..fan_in {
                    let mut s = 0.0;
                    for i in 0..fan_out {
                        s += back[i] * layer.weights[i * fan_in + k];
                    }
                    next_back[k] = s * partial0.relu_derivative(pres[l - 1][k]);
                }
                std::mem::swap(&mut back, &mut next_back);
            }
        }
    }
    Ok(grad)
}
