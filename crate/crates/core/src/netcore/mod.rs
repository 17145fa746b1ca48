//! Dense ReLU networks `x -> <w, H_L(...H_1(x))> + c` with their losses,
//! gradients and an Adam trainer.

mod grad;
mod loss;
mod train;

pub use grad::{backprop, grad_1d_closed_form, Gradient1d};
pub use loss::Loss;
pub use train::{train, train_observed, train_with_validation, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};
use crate::geometry::{DataSet, Neuron};

/// One hidden layer `x -> max(0, W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    fan_in: usize,
    fan_out: usize,
    /// Row-major `fan_out x fan_in` weights.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn new(fan_in: usize, fan_out: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if fan_in == 0 || fan_out == 0 {
            return Err(Error::InvalidParameter("layer dimensions must be positive".into()));
        }
        if weights.len() != fan_in * fan_out {
            return Err(Error::ShapeMismatch { expected: fan_in * fan_out, actual: weights.len() });
        }
        if biases.len() != fan_out {
            return Err(Error::ShapeMismatch { expected: fan_out, actual: biases.len() });
        }
        Ok(Self { fan_in, fan_out, weights, biases })
    }

    /// Layer with all parameters zero.
    pub fn zeros(fan_in: usize, fan_out: usize) -> Result<Self> {
        Self::new(fan_in, fan_out, vec![0.0; fan_in * fan_out], vec![0.0; fan_out])
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn fan_out(&self) -> usize {
        self.fan_out
    }

    /// Weight row of neuron `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.fan_in..(i + 1) * self.fan_in]
    }

    /// Neuron `i` as a standalone unit.
    pub fn neuron(&self, i: usize) -> Neuron {
        Neuron::new(self.row(i).to_vec(), self.biases[i])
    }

    /// Writes `W x + b` into `out`.
    fn pre_activations(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (w, xi) in self.row(i).iter().zip(x) {
                s += w * xi;
            }
            *o = s + self.biases[i];
        }
    }

    /// Applies the layer including the ReLU.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.fan_out];
        self.pre_activations(x, &mut out);
        out.iter_mut().for_each(|v| *v = v.max(0.0));
        out
    }

    /// Applies the layer to every point of a data set.
    pub fn apply_all(&self, data: &DataSet) -> Result<DataSet> {
        if data.dim() != self.fan_in {
            return Err(Error::ShapeMismatch { expected: self.fan_in, actual: data.dim() });
        }
        let values: Vec<f64> = data.points().flat_map(|x| self.apply(x)).collect();
        DataSet::from_flat(data.len(), self.fan_out, values)
    }
}

/// Parameters of a ReLU network with scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub hidden: Vec<DenseLayer>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl MlpParams {
    /// Checks shape compatibility and finiteness.
    pub fn new(hidden: Vec<DenseLayer>, output_weights: Vec<f64>, output_bias: f64) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::Empty("network needs a hidden layer"));
        }
        for pair in hidden.windows(2) {
            if pair[1].fan_in != pair[0].fan_out {
                return Err(Error::ShapeMismatch { expected: pair[0].fan_out, actual: pair[1].fan_in });
            }
        }
        let last = hidden.last().expect("non-empty").fan_out;
        if output_weights.len() != last {
            return Err(Error::ShapeMismatch { expected: last, actual: output_weights.len() });
        }
        let params = Self { hidden, output_weights, output_bias };
        if params.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("network parameters must be finite".into()));
        }
        Ok(params)
    }

    /// One hidden layer on scalar inputs: `sum_i w_i max(0, a_i x + b_i) + c`.
    pub fn shallow_1d(a: Vec<f64>, b: Vec<f64>, w: Vec<f64>, c: f64) -> Result<Self> {
        let m = a.len();
        Self::new(vec![DenseLayer::new(1, m, a, b)?], w, c)
    }

    /// Network of the given widths with all parameters zero.
    pub fn zeros(input_dim: usize, widths: &[usize]) -> Result<Self> {
        let mut hidden = Vec::with_capacity(widths.len());
        let mut fan_in = input_dim;
        for &m in widths {
            hidden.push(DenseLayer::zeros(fan_in, m)?);
            fan_in = m;
        }
        Self::new(hidden, vec![0.0; fan_in], 0.0)
    }

    pub fn input_dim(&self) -> usize {
        self.hidden[0].fan_in
    }

    /// Widths of the hidden layers.
    pub fn widths(&self) -> Vec<usize> {
        self.hidden.iter().map(DenseLayer::fan_out).collect()
    }

    /// Number of scalar parameters.
    pub fn num_params(&self) -> usize {
        self.hidden.iter().map(|l| l.weights.len() + l.biases.len()).sum::<usize>() + self.output_weights.len() + 1
    }

    /// Parameters in a fixed order: per layer weights then biases, then
    /// output weights and output bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.hidden {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out.extend_from_slice(&self.output_weights);
        out.push(self.output_bias);
        out
    }

    /// Inverse of [`to_flat`](Self::to_flat).
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::ShapeMismatch { expected: self.num_params(), actual: flat.len() });
        }
        let mut pos = 0;
        let mut take = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[pos..pos + dst.len()]);
            pos += dst.len();
        };
        for l in &mut self.hidden {
            take(&mut l.weights);
            take(&mut l.biases);
        }
        take(&mut self.output_weights);
        let mut c = [0.0];
        take(&mut c);
        self.output_bias = c[0];
        Ok(())
    }

    /// Network output `g(x)`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch { expected: self.input_dim(), actual: x.len() });
        }
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> f64 {
        let mut h = x.to_vec();
        for layer in &self.hidden {
            h = layer.apply(&h);
        }
        let mut s = 0.0;
        for (w, v) in self.output_weights.iter().zip(&h) {
            s += w * v;
        }
        s + self.output_bias
    }

    /// Outputs of hidden layer `l` (0-based) on every point.
    pub fn layer_outputs(&self, data: &DataSet, l: usize) -> Result<DataSet> {
        if l >= self.hidden.len() {
            return Err(Error::Domain(format!("layer {l} out of range")));
        }
        let mut cur = self.hidden[0].apply_all(data)?;
        for layer in &self.hidden[1..=l] {
            cur = layer.apply_all(&cur)?;
        }
        Ok(cur)
    }
}

/// Inputs with real labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub inputs: DataSet,
    pub labels: Vec<f64>,
}

impl LabeledData {
    pub fn new(inputs: DataSet, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != inputs.len() {
            return Err(Error::ShapeMismatch { expected: inputs.len(), actual: labels.len() });
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(Error::Domain("labels must be finite".into()));
        }
        Ok(Self { inputs, labels })
    }

    /// Scalar inputs labelled by `f`.
    pub fn from_fn_1d<F: Fn(f64) -> f64>(xs: &[f64], f: F) -> Result<Self> {
        Self::new(DataSet::from_1d(xs)?, xs.iter().map(|&x| f(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Subset with the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(self.inputs.select(indices)?, indices.iter().map(|&j| self.labels[j]).collect())
    }
}

/// ReLU derivative at zero, a value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partial0(f64);

impl Partial0 {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidParameter(format!("partial0 must lie in [0, 1], got {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Derivative of the ReLU at `z`.
    pub fn relu_derivative(&self, z: f64) -> f64 {
        if z > 0.0 {
            1.0
        } else if z < 0.0 {
            0.0
        } else {
            self.0
        }
    }
}

/// Mean loss `(1/n) sum_j L(y_j, g(x_j))`.
pub fn empirical_risk(params: &MlpParams, data: &LabeledData, loss: Loss) -> Result<f64> {
    if data.inputs.dim() != params.input_dim() {
        return Err(Error::ShapeMismatch { expected: params.input_dim(), actual: data.inputs.dim() });
    }
    let mut total = 0.0;
    for (x, &y) in data.inputs.points().zip(&data.labels) {
        total += loss.value(y, params.forward_unchecked(x));
    }
    Ok(total / data.len() as f64)
}

/// Root mean squared error of the network on the data.
pub fn rmse(params: &MlpParams, data: &LabeledData) -> Result<f64> {
    Ok(empirical_risk(params, data, Loss::LeastSquares)?.sqrt())
}
