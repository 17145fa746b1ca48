//! Closed-form predictions for randomly initialized neurons: state
//! probabilities, weight-norm statistics, expected output size and the
//! density of weight directions.

use crate::error::{Error, Result};
use crate::ratiodist::{RatioPair, ScalarDist};
use crate::special::{gamma_q, ln_gamma, normal_cdf};

pub use crate::special::{normal_cdf as phi, upper_incomplete_gamma as incomplete_gamma_upper};

/// Probabilities of the three neuron states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbs {
    pub p_fully_active: f64,
    pub p_semi_active: f64,
    pub p_inactive: f64,
}

impl StateProbs {
    pub fn sum(&self) -> f64 {
        self.p_fully_active + self.p_semi_active + self.p_inactive
    }
}

/// State probabilities of a scalar neuron `max(0, a x + b)` with
/// `b ~ bias`, `a ~ weight` on data spanning `[x_min, x_max]`.
///
/// The knot `-b/a` is fully active iff it falls in `(x_min, x_max)`, and the
/// split `F = F⁺ + F⁻` of the law of `b/a` separates the two orientations.
/// This needs a continuous law of `b/a`; a point mass at zero for the bias
/// is only accepted when the window contains 0 in its interior, where every
/// neuron is fully active.
pub fn state_probabilities(bias: &ScalarDist, weight: &ScalarDist, x_min: f64, x_max: f64) -> Result<StateProbs> {
    if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::Domain(format!("window needs x_min < x_max, got [{x_min}, {x_max}]")));
    }
    if let (ScalarDist::Dirac { .. }, ScalarDist::Dirac { .. }) = (bias, weight) {
        return Err(Error::UnsupportedContinuity("ratio of two point masses is a point mass".into()));
    }
    if bias.mass_at(0.0) > 0.0 {
        if x_min < 0.0 && 0.0 < x_max {
            return Ok(StateProbs { p_fully_active: 1.0, p_semi_active: 0.0, p_inactive: 0.0 });
        }
        return Err(Error::UnsupportedContinuity(
            "zero bias puts every knot at 0, so the knot law has an atom; use zero_bias_state_probabilities".into(),
        ));
    }
    let pair = RatioPair::new(*bias, *weight)?;
    let (lo, hi) = (-x_max, -x_min);
    let p_fa = pair.cdf(hi) - pair.cdf(lo);
    let p_sa = (1.0 - weight.cdf_left(0.0)) + pair.fminus(lo) - pair.fplus(hi);
    let p_ia = weight.cdf(0.0) + pair.fplus(lo) - pair.fminus(hi);
    Ok(StateProbs {
        p_fully_active: p_fa.clamp(0.0, 1.0),
        p_semi_active: p_sa.clamp(0.0, 1.0),
        p_inactive: p_ia.clamp(0.0, 1.0),
    })
}

/// State probabilities for zero biases, where every knot sits at 0.
pub fn zero_bias_state_probabilities(weight: &ScalarDist, x_min: f64, x_max: f64) -> Result<StateProbs> {
    if !(x_min < x_max) {
        return Err(Error::Domain(format!("window needs x_min < x_max, got [{x_min}, {x_max}]")));
    }
    if weight.mass_at(0.0) > 0.0 {
        return Err(Error::InvalidDistribution("weight law has an atom at zero".into()));
    }
    let p_pos = 1.0 - weight.cdf(0.0);
    let p_neg = weight.cdf_left(0.0);
    Ok(if x_min < 0.0 && 0.0 < x_max {
        StateProbs { p_fully_active: 1.0, p_semi_active: 0.0, p_inactive: 0.0 }
    } else if x_min >= 0.0 {
        StateProbs { p_fully_active: 0.0, p_semi_active: p_pos, p_inactive: p_neg }
    } else {
        StateProbs { p_fully_active: 0.0, p_semi_active: p_neg, p_inactive: p_pos }
    })
}

/// Moments of `||X||` for `X ~ N(0, σ² I_d)` with bounds on the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormStats {
    pub mean: f64,
    pub variance: f64,
    pub mode: f64,
    /// `σ sqrt(d - 1/2)`.
    pub gautschi_lo: f64,
    /// `σ sqrt(d - 1/4)`.
    pub gautschi_hi: f64,
}

fn check_norm_args(d: usize, sigma: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// `Γ(x + 1/2) / Γ(x)`; an asymptotic series for large `x`, where the
/// difference of log-gammas loses the digits that separate the mean from
/// its bounds.
fn half_gamma_ratio(x: f64) -> f64 {
    if x < 100.0 {
        return (ln_gamma(x + 0.5) - ln_gamma(x)).exp();
    }
    const C: [f64; 7] =
        [1.0, -1.0 / 8.0, 1.0 / 128.0, 5.0 / 1024.0, -21.0 / 32768.0, -399.0 / 262144.0, 869.0 / 4194304.0];
    let inv = 1.0 / x;
    x.sqrt() * C.iter().rev().fold(0.0, |acc, c| acc * inv + c)
}

/// Mean, variance, mode and mean bounds of the chi law scaled by `sigma`.
pub fn weight_norm_stats(d: usize, sigma: f64) -> Result<NormStats> {
    check_norm_args(d, sigma)?;
    let df = d as f64;
    let mean = sigma * std::f64::consts::SQRT_2 * half_gamma_ratio(0.5 * df);
    Ok(NormStats {
        mean,
        variance: (df * sigma * sigma - mean * mean).max(0.0),
        mode: sigma * (df - 1.0).sqrt(),
        gautschi_lo: sigma * (df - 0.5).sqrt(),
        gautschi_hi: sigma * (df - 0.25).sqrt(),
    })
}

/// Density of `||X||` at `x` for `X ~ N(0, σ² I_d)`.
pub fn weight_norm_density(d: usize, sigma: f64, x: f64) -> Result<f64> {
    check_norm_args(d, sigma)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let df = d as f64;
    if x == 0.0 {
        return Ok(if d == 1 { (2.0 / std::f64::consts::PI).sqrt() / sigma } else { 0.0 });
    }
    let ln = (1.0 - 0.5 * df) * std::f64::consts::LN_2 - ln_gamma(0.5 * df) - df * sigma.ln() + (df - 1.0) * x.ln()
        - x * x / (2.0 * sigma * sigma);
    Ok(ln.exp())
}

/// `P(||X|| >= s)` for `X ~ N(0, σ² I_d)`.
pub fn weight_norm_tail(d: usize, sigma: f64, s: f64) -> Result<f64> {
    check_norm_args(d, sigma)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("threshold must be non-negative, got {s}")));
    }
    gamma_q(0.5 * d as f64, s * s / (2.0 * sigma * sigma))
}

/// Upper bound on `P(||A|| >= sqrt(2) + δ)` for `A ~ N(0, (2/d) I_d)`, valid
/// for `d >= 3`. Returns 1 where the exponent base `α = sqrt(2) δ + δ²/2`
/// is not positive.
pub fn weight_norm_tail_bound(d: usize, delta: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!("tail bound needs d >= 3, got {d}")));
    }
    if !(delta >= -1.0) {
        return Err(Error::Domain(format!("delta must be >= -1, got {delta}")));
    }
    let alpha = std::f64::consts::SQRT_2 * delta + 0.5 * delta * delta;
    if alpha <= 0.0 {
        return Ok(1.0);
    }
    let df = d as f64;
    let prefactor = 2.0 * df.sqrt() / (std::f64::consts::PI.sqrt() * (4.0 + 2.0 * std::f64::consts::SQRT_2 * df * delta + df * delta * delta));
    let power = (0.5 * df * ((1.0 + alpha).ln() - alpha)).exp();
    Ok((prefactor * power).min(1.0))
}

/// Deviation `t` in `P(||A|| >= E||A|| + t) <= e^{-τ/4}` with `t = sqrt(τ/d)`,
/// chosen so the right-hand side equals `level`.
pub fn lipschitz_deviation(d: usize, level: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level must lie in (0, 1), got {level}")));
    }
    let tau = -4.0 * level.ln();
    Ok((tau / d as f64).sqrt())
}

/// Expected squared output `E max(0, Y)²` of a He-initialized neuron with
/// `Y = <A, x> + b`, as a function of `u = ||x|| / sqrt(d)` and the bias.
///
/// The first term carries the sign of `b`, so the formula holds for negative
/// biases as well.
pub fn psi_output_size(u: f64, b: f64) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("psi needs finite u >= 0 and finite b, got u={u}, b={b}")));
    }
    if u == 0.0 {
        return Ok(if b >= 0.0 { b * b } else { 0.0 });
    }
    let c2 = b * b / (4.0 * u * u);
    let q = gamma_q(0.5, c2)?;
    let sign = if b < 0.0 { -1.0 } else { 1.0 };
    let first = u * u * (1.0 + sign * (1.0 - q));
    let second = u * b / std::f64::consts::PI.sqrt() * (-c2).exp();
    let third = b * b * normal_cdf(b / (std::f64::consts::SQRT_2 * u));
    Ok(first + second + third)
}

/// Density `1 / (d 2^d ||ξ||_∞^d)` of the direction `A / ||A||` with respect
/// to surface measure, for weights with i.i.d. `U[-α, α]` entries.
///
/// The value does not depend on `α`.
pub fn direction_density_uniform_weights(xi: &[f64]) -> Result<f64> {
    if xi.is_empty() {
        return Err(Error::Empty("direction vector"));
    }
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("direction must have unit norm, got {norm}")));
    }
    let d = xi.len() as i32;
    let sup = xi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(1.0 / (d as f64 * 2f64.powi(d) * sup.powi(d)))
}
