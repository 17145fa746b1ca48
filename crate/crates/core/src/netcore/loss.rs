//! Loss functions `L(y, t)` with derivatives in the prediction `t`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Supported losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    /// `(y - t)²`.
    #[default]
    LeastSquares,
    /// `ln(1 + exp(-y t))` for labels `y ∈ {-1, 1}`.
    Logistic,
}

impl Loss {
    /// `L(y, t)`.
    pub fn value(&self, y: f64, t: f64) -> f64 {
        match self {
            Self::LeastSquares => (y - t) * (y - t),
            Self::Logistic => softplus(-y * t),
        }
    }

    /// `∂L/∂t (y, t)`.
    pub fn derivative(&self, y: f64, t: f64) -> f64 {
        match self {
            Self::LeastSquares => 2.0 * (t - y),
            Self::Logistic => -y * sigmoid(-y * t),
        }
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LeastSquares => "least-squares",
            Self::Logistic => "logistic",
        })
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "least-squares" => Ok(Self::LeastSquares),
            "logistic" => Ok(Self::Logistic),
            other => Err(Error::InvalidParameter(format!("unknown loss '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_derivatives() {
        assert_eq!(Loss::LeastSquares.value(1.0, 3.0), 4.0);
        assert_eq!(Loss::LeastSquares.derivative(1.0, 3.0), 4.0);
        assert!((Loss::Logistic.value(1.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((Loss::Logistic.derivative(1.0, 0.0) + 0.5).abs() < 1e-15);
        assert!(Loss::Logistic.value(1.0, -800.0).is_finite());
        assert!(Loss::Logistic.value(-1.0, -800.0) >= 0.0);
    }

    #[test]
    fn derivatives_match_differences() {
        for loss in [Loss::LeastSquares, Loss::Logistic] {
            for &(y, t) in &[(1.0, 0.3), (-1.0, 2.0), (1.0, -4.0)] {
                let h = 1e-6;
                let fd = (loss.value(y, t + h) - loss.value(y, t - h)) / (2.0 * h);
                assert!((fd - loss.derivative(y, t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn parse_roundtrip() {
        for loss in [Loss::LeastSquares, Loss::Logistic] {
            assert_eq!(loss.to_string().parse::<Loss>().unwrap(), loss);
        }
        assert!("hinge".parse::<Loss>().is_err());
    }
}
