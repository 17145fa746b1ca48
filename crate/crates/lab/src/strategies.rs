//! Named initialization strategies used by the experiments.

use std::fmt;
use std::str::FromStr;

use reluinit::analytics::{state_probabilities, zero_bias_state_probabilities, StateProbs};
use reluinit::initstrat::{BiasScheme, InitConfig, WeightScheme};
use reluinit::ratiodist::ScalarDist;

use crate::error::{LabError, LabResult};

/// The six scalar bias/weight laws compared in the state-probability sweep.
///
/// Each is parametrized by a spread ratio `ρ`:
///
/// | strategy | bias | weight | `ρ` |
/// |---|---|---|---|
/// | `zero-bias` | `0` | `N(0, 1)` | unused |
/// | `dirac-normal` | `1` | `N(0, ρ²)` | `σ_a / b` |
/// | `dirac-uniform` | `1` | `U[-√3 ρ, √3 ρ]` | `α / (√3 b)` |
/// | `normal-normal` | `N(0, 1)` | `N(0, ρ²)` | `σ_a / σ_b` |
/// | `uniform-asym` | `U[0, 1]` | `U[-ρ/2, ρ/2]` | `2α / β` |
/// | `uniform-sym` | `U[-1, 1]` | `U[-ρ, ρ]` | `α / β` |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStrategy {
    ZeroBias,
    DiracNormal,
    DiracUniform,
    NormalNormal,
    UniformAsym,
    UniformSym,
}

impl SweepStrategy {
    pub const ALL: [Self; 6] =
        [Self::ZeroBias, Self::DiracNormal, Self::DiracUniform, Self::NormalNormal, Self::UniformAsym, Self::UniformSym];

    /// The five families with a continuous knot law.
    pub const CONTINUOUS: [Self; 5] =
        [Self::DiracNormal, Self::DiracUniform, Self::NormalNormal, Self::UniformAsym, Self::UniformSym];

    pub fn name(&self) -> &'static str {
        match self {
            Self::ZeroBias => "zero-bias",
            Self::DiracNormal => "dirac-normal",
            Self::DiracUniform => "dirac-uniform",
            Self::NormalNormal => "normal-normal",
            Self::UniformAsym => "uniform-asym",
            Self::UniformSym => "uniform-sym",
        }
    }

    /// `(bias law, weight law)` at spread ratio `rho`.
    pub fn laws(&self, rho: f64) -> LabResult<(ScalarDist, ScalarDist)> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(LabError::Config(format!("rho must be positive, got {rho}")));
        }
        Ok(match self {
            Self::ZeroBias => (ScalarDist::dirac(0.0)?, ScalarDist::normal(1.0)?),
            Self::DiracNormal => (ScalarDist::dirac(1.0)?, ScalarDist::normal(rho)?),
            Self::DiracUniform => (ScalarDist::dirac(1.0)?, ScalarDist::symmetric_uniform(3f64.sqrt() * rho)?),
            Self::NormalNormal => (ScalarDist::normal(1.0)?, ScalarDist::normal(rho)?),
            Self::UniformAsym => (ScalarDist::uniform(0.0, 1.0)?, ScalarDist::symmetric_uniform(0.5 * rho)?),
            Self::UniformSym => (ScalarDist::symmetric_uniform(1.0)?, ScalarDist::symmetric_uniform(rho)?),
        })
    }

    /// Analytic state probabilities on the window `[x_min, x_max]`.
    pub fn state_probabilities(&self, rho: f64, x_min: f64, x_max: f64) -> LabResult<StateProbs> {
        let (bias, weight) = self.laws(rho)?;
        Ok(match self {
            Self::ZeroBias => zero_bias_state_probabilities(&weight, x_min, x_max)?,
            _ => state_probabilities(&bias, &weight, x_min, x_max)?,
        })
    }

    /// Initialization config drawing from the same laws.
    pub fn init_config(&self, rho: f64) -> LabResult<InitConfig> {
        let (bias, weight) = self.laws(rho)?;
        Ok(InitConfig { weight: weight_scheme_of(&weight)?, bias: bias_scheme_of(&bias), ..Default::default() })
    }
}

impl fmt::Display for SweepStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepStrategy {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown strategy '{s}'")))
    }
}

/// Weight scheme drawing i.i.d. entries from a centred law.
pub fn weight_scheme_of(dist: &ScalarDist) -> LabResult<WeightScheme> {
    match *dist {
        ScalarDist::Normal { sigma } => Ok(WeightScheme::NormalSigma(sigma)),
        ScalarDist::Uniform { lo, hi } if lo == -hi => Ok(WeightScheme::UniformAlpha(hi)),
        other => Err(LabError::Config(format!("no weight scheme for {other:?}"))),
    }
}

/// Bias scheme drawing from a scalar law.
pub fn bias_scheme_of(dist: &ScalarDist) -> BiasScheme {
    match *dist {
        ScalarDist::Dirac { b: 0.0 } => BiasScheme::Zero,
        ScalarDist::Dirac { b } => BiasScheme::Const(b),
        ScalarDist::Normal { sigma } => BiasScheme::NormalSigma(sigma),
        ScalarDist::Uniform { lo, hi } => BiasScheme::UniformRange(lo, hi),
    }
}

/// Initialization families of the one-dimensional training experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyInit {
    /// He-normal weights, zero biases: all knots at 0.
    HeZero,
    /// He-normal weights, knots uniform over the data range.
    KnotUniform,
}

impl ToyInit {
    pub const ALL: [Self; 2] = [Self::HeZero, Self::KnotUniform];

    pub fn name(&self) -> &'static str {
        match self {
            Self::HeZero => "he-zero",
            Self::KnotUniform => "knot-uniform",
        }
    }

    pub fn init_config(&self) -> InitConfig {
        let bias = match self {
            Self::HeZero => BiasScheme::Zero,
            Self::KnotUniform => BiasScheme::KnotUniform1D,
        };
        InitConfig { weight: WeightScheme::HeNormal, bias, ..Default::default() }
    }
}

impl FromStr for ToyInit {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown init '{s}'")))
    }
}

/// Target functions of the one-dimensional training experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `2 - t`.
    Linear,
    /// `1 - 6 |t - 1/3|`.
    Hat,
    /// `sin(2 π t)`.
    Sine,
}

impl Target {
    pub const ALL: [Self; 3] = [Self::Linear, Self::Hat, Self::Sine];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Hat => "hat",
            Self::Sine => "sin",
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Linear => 2.0 - t,
            Self::Hat => 1.0 - 6.0 * (t - 1.0 / 3.0).abs(),
            Self::Sine => (2.0 * std::f64::consts::PI * t).sin(),
        }
    }
}

impl FromStr for Target {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown target '{s}'")))
    }
}
