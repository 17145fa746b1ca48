//! Initialization strategies for weights and biases.
//!
//! Besides the classical He/Xavier schemes this includes data-dependent
//! biases: each neuron's edge is placed through a random point of the
//! relative interior of the convex hull of `N` training samples, which
//! guarantees a fully active neuron whenever the samples are not all equal.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{dot, sample_ico, DataSet, Neuron};
use crate::netcore::{DenseLayer, MlpParams, Partial0};
use crate::rng::{derive_seed, stream_rng, StreamRng};

/// Law of each weight row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// `N(0, 2 / fan_in)` entries.
    HeNormal,
    /// Uniform entries with variance `2 / fan_in`.
    HeUniform,
    /// `U[-α, α]` entries with `α = sqrt(6 / (fan_in + fan_out))`.
    XavierUniform,
    /// `N(0, σ²)` entries.
    NormalSigma(f64),
    /// `U[-α, α]` entries.
    UniformAlpha(f64),
    /// Uniform on the unit sphere.
    Sphere,
    /// Sphere direction times a radius `R ~ U[0, 2]`.
    Ball,
}

impl WeightScheme {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::NormalSigma(s) if !(s > 0.0) || !s.is_finite() => {
                Err(Error::InvalidParameter(format!("weight sigma must be positive, got {s}")))
            }
            Self::UniformAlpha(a) if !(a > 0.0) || !a.is_finite() => {
                Err(Error::InvalidParameter(format!("weight alpha must be positive, got {a}")))
            }
            _ => Ok(()),
        }
    }

    /// Draws one row of `fan_in` weights.
    pub fn draw_row<R: Rng + ?Sized>(&self, fan_in: usize, fan_out: usize, rng: &mut R) -> Vec<f64> {
        let normal = |rng: &mut R, s: f64| -> Vec<f64> { (0..fan_in).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect() };
        let uniform = |rng: &mut R, a: f64| -> Vec<f64> { (0..fan_in).map(|_| a * (2.0 * rng.random::<f64>() - 1.0)).collect() };
        let fi = fan_in as f64;
        match *self {
            Self::HeNormal => normal(rng, (2.0 / fi).sqrt()),
            Self::HeUniform => uniform(rng, (6.0 / fi).sqrt()),
            Self::XavierUniform => uniform(rng, (6.0 / (fi + fan_out as f64)).sqrt()),
            Self::NormalSigma(s) => normal(rng, s),
            Self::UniformAlpha(a) => uniform(rng, a),
            Self::Sphere => unit_vector(fan_in, rng),
            Self::Ball => {
                let r = 2.0 * rng.random::<f64>();
                unit_vector(fan_in, rng).into_iter().map(|v| r * v).collect()
            }
        }
    }
}

fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Law of each bias, possibly depending on the neuron's weights and the layer inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasScheme {
    Zero,
    Const(f64),
    NormalSigma(f64),
    UniformRange(f64, f64),
    /// Knot `x* ~ U(x_min, x_max)` of scalar inputs, `b = -a x*`.
    KnotUniform1D,
    /// Edge through a random interior point of the hull of `N` samples.
    HullFixed(usize),
    /// As [`HullFixed`](Self::HullFixed) with `N ~ U{1, ..., N_max}` per neuron.
    HullRandom(usize),
}

impl BiasScheme {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Self::Const(b) if !b.is_finite() => bad(format!("bias must be finite, got {b}")),
            Self::NormalSigma(s) if !(s > 0.0) || !s.is_finite() => bad(format!("bias sigma must be positive, got {s}")),
            Self::UniformRange(lo, hi) if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                bad(format!("bias range needs lo < hi, got [{lo}, {hi}]"))
            }
            Self::HullFixed(0) | Self::HullRandom(0) => bad("hull sample count must be at least 1".into()),
            _ => Ok(()),
        }
    }

    /// Whether the scheme needs the layer inputs.
    pub fn is_data_dependent(&self) -> bool {
        matches!(self, Self::KnotUniform1D | Self::HullFixed(_) | Self::HullRandom(_))
    }

    /// Draws a bias and, for hull schemes, the anchor point `x*` its edge passes through.
    fn draw<R: Rng + ?Sized>(&self, a: &[f64], inputs: Option<&DataSet>, rng: &mut R) -> Result<(f64, Option<Vec<f64>>)> {
        match *self {
            Self::Zero => Ok((0.0, None)),
            Self::Const(b) => Ok((b, None)),
            Self::NormalSigma(s) => Ok((s * rng.sample::<f64, _>(StandardNormal), None)),
            Self::UniformRange(lo, hi) => Ok((lo + (hi - lo) * rng.random::<f64>(), None)),
            Self::KnotUniform1D => {
                let data = inputs.ok_or(Error::MissingLayerInputs)?;
                if data.dim() != 1 {
                    return Err(Error::InvalidParameter("knot-uniform biases need scalar inputs".into()));
                }
                let (lo, hi) = data.coordinate_range(0);
                let knot = lo + (hi - lo) * rng.random::<f64>();
                Ok((-a[0] * knot, None))
            }
            Self::HullFixed(n) => hull_bias(a, n, inputs.ok_or(Error::MissingLayerInputs)?, rng),
            Self::HullRandom(n_max) => {
                let data = inputs.ok_or(Error::MissingLayerInputs)?;
                let n = rng.random_range(1..=n_max);
                hull_bias(a, n, data, rng)
            }
        }
    }
}

/// `-<a, x*>` and `x*`, drawn from the interior of the hull of `n` picked samples.
fn hull_bias<R: Rng + ?Sized>(a: &[f64], n: usize, data: &DataSet, rng: &mut R) -> Result<(f64, Option<Vec<f64>>)> {
    let picks: Vec<usize> = if data.len() >= n {
        index::sample(rng, data.len(), n).into_vec()
    } else {
        (0..n).map(|_| rng.random_range(0..data.len())).collect()
    };
    let x_star = sample_ico(&data.select(&picks)?, rng);
    Ok((-dot(a, &x_star), Some(x_star)))
}

/// Weight and bias laws of one layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    pub weight: WeightScheme,
    pub bias: BiasScheme,
    pub partial0: Partial0,
    /// Experiment seed; callers pass it (or a value derived from it) to the
    /// init functions.
    pub seed: u64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self { weight: WeightScheme::HeNormal, bias: BiasScheme::Zero, partial0: Partial0::default(), seed: 0 }
    }
}

impl InitConfig {
    /// Key/value form used in experiment config files.
    pub fn to_kv(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("weight".to_string(), self.weight.to_string()),
            ("bias".to_string(), self.bias.to_string()),
            ("partial0".to_string(), self.partial0.value().to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ])
    }

    /// Reads the keys written by [`to_kv`](Self::to_kv); missing keys keep defaults.
    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(v) = kv.get("weight") {
            cfg.weight = v.parse()?;
        }
        if let Some(v) = kv.get("bias") {
            cfg.bias = v.parse()?;
        }
        if let Some(v) = kv.get("partial0") {
            cfg.partial0 = Partial0::new(parse_f64(v)?)?;
        }
        if let Some(v) = kv.get("seed") {
            cfg.seed = v.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad seed '{v}'")))?;
        }
        Ok(cfg)
    }
}

/// Draws one layer. Neuron `i` uses the random stream `(seed, i)`.
pub fn init_layer(
    cfg: &InitConfig,
    fan_in: usize,
    fan_out: usize,
    layer_inputs: Option<&DataSet>,
    seed: u64,
) -> Result<DenseLayer> {
    init_layer_with_anchors(cfg, fan_in, fan_out, layer_inputs, seed).map(|(layer, _)| layer)
}

/// As [`init_layer`], also returning for each neuron the hull point `x*` on
/// its edge (`None` for schemes without one).
pub fn init_layer_with_anchors(
    cfg: &InitConfig,
    fan_in: usize,
    fan_out: usize,
    layer_inputs: Option<&DataSet>,
    seed: u64,
) -> Result<(DenseLayer, Vec<Option<Vec<f64>>>)> {
    cfg.weight.validate()?;
    cfg.bias.validate()?;
    if let Some(data) = layer_inputs {
        if data.dim() != fan_in {
            return Err(Error::ShapeMismatch { expected: fan_in, actual: data.dim() });
        }
    }
    if cfg.bias.is_data_dependent() && layer_inputs.is_none() {
        return Err(Error::MissingLayerInputs);
    }
    let mut weights = Vec::with_capacity(fan_in * fan_out);
    let mut biases = Vec::with_capacity(fan_out);
    let mut anchors = Vec::with_capacity(fan_out);
    for i in 0..fan_out {
        let mut rng: StreamRng = stream_rng(seed, i as u64);
        let row = cfg.weight.draw_row(fan_in, fan_out, &mut rng);
        let (b, anchor) = cfg.bias.draw(&row, layer_inputs, &mut rng)?;
        biases.push(b);
        anchors.push(anchor);
        weights.extend(row);
    }
    Ok((DenseLayer::new(fan_in, fan_out, weights, biases)?, anchors))
}

/// One hidden layer of a [`NetworkPlan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerPlan {
    pub width: usize,
    pub init: InitConfig,
}

/// Architecture and per-layer laws of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPlan {
    pub input_dim: usize,
    pub layers: Vec<LayerPlan>,
    pub output_weight: WeightScheme,
    pub output_bias: f64,
    /// Cap on the number of training inputs propagated for data-dependent layers.
    pub subsample: Option<usize>,
}

impl NetworkPlan {
    /// Same init for every hidden layer, He-normal output weights, `c = 0`.
    pub fn uniform(input_dim: usize, widths: &[usize], init: InitConfig) -> Self {
        Self {
            input_dim,
            layers: widths.iter().map(|&width| LayerPlan { width, init }).collect(),
            output_weight: WeightScheme::HeNormal,
            output_bias: 0.0,
            subsample: None,
        }
    }
}

/// Initializes all layers in order, feeding each data-dependent layer the
/// images of the training inputs under the layers below it.
pub fn init_network(plan: &NetworkPlan, train_inputs: Option<&DataSet>, seed: u64) -> Result<MlpParams> {
    if plan.layers.is_empty() {
        return Err(Error::Empty("network plan has no hidden layer"));
    }
    let needs_data = plan.layers.iter().any(|l| l.init.bias.is_data_dependent());
    let mut current = match (train_inputs, needs_data) {
        (None, true) => return Err(Error::MissingLayerInputs),
        (Some(data), true) => Some(match plan.subsample {
            Some(k) if k < data.len() => {
                let mut rng = stream_rng(derive_seed(seed, u64::MAX), 0);
                let mut picks = index::sample(&mut rng, data.len(), k).into_vec();
                picks.sort_unstable();
                data.select(&picks)?
            }
            _ => data.clone(),
        }),
        _ => None,
    };
    let mut hidden = Vec::with_capacity(plan.layers.len());
    let mut fan_in = plan.input_dim;
    for (l, layer_plan) in plan.layers.iter().enumerate() {
        let layer = init_layer(&layer_plan.init, fan_in, layer_plan.width, current.as_ref(), derive_seed(seed, l as u64))?;
        if let Some(data) = current.take() {
            current = Some(layer.apply_all(&data)?);
        }
        fan_in = layer.fan_out();
        hidden.push(layer);
    }
    plan.output_weight.validate()?;
    let mut rng = stream_rng(derive_seed(seed, plan.layers.len() as u64), 0);
    let output_weights = plan.output_weight.draw_row(fan_in, 1, &mut rng);
    MlpParams::new(hidden, output_weights, plan.output_bias)
}

/// Knot `-b / a` of a scalar neuron.
pub fn knot_of(neuron: &Neuron) -> Result<f64> {
    neuron.knot()
}

/// Distance `|b| / ||a||` of the neuron's edge from the origin.
pub fn edge_distance(neuron: &Neuron) -> Result<f64> {
    let norm = dot(&neuron.a, &neuron.a).sqrt();
    if norm == 0.0 {
        return Err(Error::ConstantNeuron);
    }
    Ok(neuron.b.abs() / norm)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number '{s}'")))
}

fn split_args(s: &str) -> (&str, Vec<&str>) {
    let mut parts = s.trim().split(':');
    let head = parts.next().unwrap_or("");
    (head, parts.collect())
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HeNormal => write!(f, "he-normal"),
            Self::HeUniform => write!(f, "he-uniform"),
            Self::XavierUniform => write!(f, "xavier-uniform"),
            Self::NormalSigma(s) => write!(f, "normal:{s}"),
            Self::UniformAlpha(a) => write!(f, "uniform:{a}"),
            Self::Sphere => write!(f, "sphere"),
            Self::Ball => write!(f, "ball"),
        }
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let scheme = match split_args(s) {
            ("he-normal", a) if a.is_empty() => Self::HeNormal,
            ("he-uniform", a) if a.is_empty() => Self::HeUniform,
            ("xavier-uniform", a) if a.is_empty() => Self::XavierUniform,
            ("sphere", a) if a.is_empty() => Self::Sphere,
            ("ball", a) if a.is_empty() => Self::Ball,
            ("normal", a) if a.len() == 1 => Self::NormalSigma(parse_f64(a[0])?),
            ("uniform", a) if a.len() == 1 => Self::UniformAlpha(parse_f64(a[0])?),
            _ => return Err(Error::InvalidParameter(format!("unknown weight scheme '{s}'"))),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

impl fmt::Display for BiasScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Const(b) => write!(f, "const:{b}"),
            Self::NormalSigma(s) => write!(f, "normal:{s}"),
            Self::UniformRange(lo, hi) => write!(f, "uniform:{lo}:{hi}"),
            Self::KnotUniform1D => write!(f, "knot-uniform"),
            Self::HullFixed(n) => write!(f, "hull:{n}"),
            Self::HullRandom(n) => write!(f, "hull-random:{n}"),
        }
    }
}

impl FromStr for BiasScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let count = |v: &str| -> Result<usize> {
            v.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad sample count '{v}'")))
        };
        let scheme = match split_args(s) {
            ("zero", a) if a.is_empty() => Self::Zero,
            ("knot-uniform", a) if a.is_empty() => Self::KnotUniform1D,
            ("const", a) if a.len() == 1 => Self::Const(parse_f64(a[0])?),
            ("normal", a) if a.len() == 1 => Self::NormalSigma(parse_f64(a[0])?),
            ("uniform", a) if a.len() == 2 => Self::UniformRange(parse_f64(a[0])?, parse_f64(a[1])?),
            ("hull", a) if a.len() == 1 => Self::HullFixed(count(a[0])?),
            ("hull-random", a) if a.len() == 1 => Self::HullRandom(count(a[0])?),
            _ => return Err(Error::InvalidParameter(format!("unknown bias scheme '{s}'"))),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}
