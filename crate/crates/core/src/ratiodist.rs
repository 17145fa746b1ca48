//! Distributions of ratios `X / Y` of independent scalar random variables.
//!
//! The CDF of `X / Y` is split as `F = F⁺ + F⁻`, where
//!
//! - `F⁺(z) = P(X <= z Y, Y > 0)`
//! - `F⁻(z) = P(X >= z Y, Y < 0)`
//!
//! Closed forms are used for Dirac numerators, normal/normal pairs and uniform
//! numerators over symmetric uniform denominators. Every other pair falls back
//! to adaptive quadrature of
//!
//! - `F⁺(z) = ∫_{(0,∞)} P((-∞, z t]) dQ(t)`
//! - `F⁻(z) = ∫_{(-∞,0)} P([z t, ∞)) dQ(t)`

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;
use crate::rng::stream_rng;
use crate::special::{normal_cdf, normal_pdf};

/// Number of standard deviations after which a normal density is treated as zero.
const NORMAL_CUTOFF: f64 = 8.5;
const QUAD_ABS_TOL: f64 = 1e-13;

/// A scalar distribution used for weights or biases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarDist {
    /// Centred normal `N(0, sigma²)`.
    Normal { sigma: f64 },
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Point mass at `b`.
    Dirac { b: f64 },
}

impl ScalarDist {
    /// Centred normal with standard deviation `sigma > 0`.
    pub fn normal(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidDistribution(format!("normal sigma must be positive, got {sigma}")));
        }
        Ok(Self::Normal { sigma })
    }

    /// Uniform on `[lo, hi]` with `lo < hi`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidDistribution(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::Uniform { lo, hi })
    }

    /// Uniform on `[-alpha, alpha]`.
    pub fn symmetric_uniform(alpha: f64) -> Result<Self> {
        Self::uniform(-alpha, alpha)
    }

    /// Point mass at `b`.
    pub fn dirac(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::InvalidDistribution(format!("dirac location must be finite, got {b}")));
        }
        Ok(Self::Dirac { b })
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { sigma } => normal_cdf(x / sigma),
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Dirac { b } => f64::from(u8::from(x >= b)),
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            Self::Dirac { b } => f64::from(u8::from(x > b)),
            _ => self.cdf(x),
        }
    }

    /// `P(X = x)`.
    pub fn mass_at(&self, x: f64) -> f64 {
        match *self {
            Self::Dirac { b } if b == x => 1.0,
            _ => 0.0,
        }
    }

    /// Lebesgue density, `None` for a point mass.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Normal { sigma } => Some(normal_pdf(x / sigma) / sigma),
            Self::Uniform { lo, hi } => Some(if x >= lo && x <= hi { 1.0 / (hi - lo) } else { 0.0 }),
            Self::Dirac { .. } => None,
        }
    }

    /// Whether `X` and `-X` have the same law.
    pub fn is_symmetric(&self) -> bool {
        match *self {
            Self::Normal { .. } => true,
            Self::Uniform { lo, hi } => lo == -hi,
            Self::Dirac { b } => b == 0.0,
        }
    }

    /// Law of `-X`.
    pub fn reflected(&self) -> Self {
        match *self {
            Self::Normal { sigma } => Self::Normal { sigma },
            Self::Uniform { lo, hi } => Self::Uniform { lo: -hi, hi: -lo },
            Self::Dirac { b } => Self::Dirac { b: -b },
        }
    }

    /// Smallest interval carrying all but a negligible fraction of the mass.
    pub fn effective_support(&self) -> (f64, f64) {
        match *self {
            Self::Normal { sigma } => (-NORMAL_CUTOFF * sigma, NORMAL_CUTOFF * sigma),
            Self::Uniform { lo, hi } => (lo, hi),
            Self::Dirac { b } => (b, b),
        }
    }

    /// Finite points where the CDF is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match *self {
            Self::Normal { .. } => Vec::new(),
            Self::Uniform { lo, hi } => vec![lo, hi],
            Self::Dirac { b } => vec![b],
        }
    }

    /// Draws one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Self::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Self::Dirac { b } => b,
        }
    }

    /// Variance of the distribution.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Normal { sigma } => sigma * sigma,
            Self::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            Self::Dirac { .. } => 0.0,
        }
    }
}

/// Evaluation route chosen for a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioMethod {
    /// Both variables are point masses.
    DiracOverDirac,
    /// Denominator is a point mass away from zero.
    DiracDenominator,
    /// Numerator is a point mass, denominator atomless.
    DiracNumerator,
    /// Both centred normal: a Cauchy law.
    NormalOverNormal,
    /// `U[0, β]`, `U[-β, β]` or `U[-β, 0]` over `U[-α, α]`.
    UniformOverSymmetricUniform,
    /// Adaptive quadrature.
    Quadrature,
}

/// Numerator/denominator pair `(P, Q)` describing `X / Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPair {
    num: ScalarDist,
    den: ScalarDist,
}

/// Shape of a uniform numerator relative to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
enum UniformSide {
    Positive,
    Symmetric,
    Negative,
}

impl RatioPair {
    /// Builds the pair; the denominator must put no mass at zero.
    pub fn new(num: ScalarDist, den: ScalarDist) -> Result<Self> {
        if den.mass_at(0.0) > 0.0 {
            return Err(Error::InvalidDistribution("denominator has an atom at zero".into()));
        }
        Ok(Self { num, den })
    }

    /// Numerator law.
    pub fn numerator(&self) -> ScalarDist {
        self.num
    }

    /// Denominator law.
    pub fn denominator(&self) -> ScalarDist {
        self.den
    }

    /// Evaluation route used by [`cdf`](Self::cdf) and friends.
    pub fn method(&self) -> RatioMethod {
        match (self.num, self.den) {
            (ScalarDist::Dirac { .. }, ScalarDist::Dirac { .. }) => RatioMethod::DiracOverDirac,
            (_, ScalarDist::Dirac { .. }) => RatioMethod::DiracDenominator,
            (ScalarDist::Dirac { .. }, _) => RatioMethod::DiracNumerator,
            (ScalarDist::Normal { .. }, ScalarDist::Normal { .. }) => RatioMethod::NormalOverNormal,
            (ScalarDist::Uniform { .. }, ScalarDist::Uniform { .. }) if self.uniform_side().is_some() => {
                RatioMethod::UniformOverSymmetricUniform
            }
            _ => RatioMethod::Quadrature,
        }
    }

    fn uniform_side(&self) -> Option<(UniformSide, f64, f64)> {
        let (ScalarDist::Uniform { lo, hi }, ScalarDist::Uniform { lo: qlo, hi: qhi }) = (self.num, self.den) else {
            return None;
        };
        if qlo != -qhi {
            return None;
        }
        let side = if lo == 0.0 {
            UniformSide::Positive
        } else if hi == 0.0 {
            UniformSide::Negative
        } else if lo == -hi {
            UniformSide::Symmetric
        } else {
            return None;
        };
        let beta = if side == UniformSide::Negative { -lo } else { hi };
        Some((side, qhi, beta))
    }

    /// `P(X / Y = z)`.
    pub fn mass_at(&self, z: f64) -> f64 {
        match (self.num, self.den) {
            (ScalarDist::Dirac { b }, ScalarDist::Dirac { b: c }) => f64::from(u8::from(b / c == z)),
            (_, ScalarDist::Dirac { .. }) => 0.0,
            _ if z == 0.0 => self.num.mass_at(0.0),
            _ => 0.0,
        }
    }

    /// `F⁺(z) = P(X <= z Y, Y > 0)`.
    pub fn fplus(&self, z: f64) -> f64 {
        match self.method() {
            RatioMethod::DiracOverDirac => {
                let (b, c) = self.dirac_pair();
                if c > 0.0 && z >= b / c { 1.0 } else { 0.0 }
            }
            RatioMethod::DiracDenominator => {
                let c = self.dirac_den();
                if c > 0.0 { self.num.cdf(z * c) } else { 0.0 }
            }
            RatioMethod::DiracNumerator => self.dirac_num_fplus(z),
            RatioMethod::NormalOverNormal => 0.5 * self.cauchy_cdf(z),
            RatioMethod::UniformOverSymmetricUniform => self.uniform_fplus(z),
            RatioMethod::Quadrature => self.quad_fplus(z),
        }
    }

    /// `F⁻(z) = P(X >= z Y, Y < 0)`.
    pub fn fminus(&self, z: f64) -> f64 {
        match self.method() {
            RatioMethod::DiracOverDirac => {
                let (b, c) = self.dirac_pair();
                if c < 0.0 && z >= b / c { 1.0 } else { 0.0 }
            }
            RatioMethod::DiracDenominator => {
                let c = self.dirac_den();
                if c < 0.0 { 1.0 - self.num.cdf_left(z * c) } else { 0.0 }
            }
            RatioMethod::DiracNumerator => self.dirac_num_fminus(z),
            RatioMethod::NormalOverNormal => 0.5 * self.cauchy_cdf(z),
            RatioMethod::UniformOverSymmetricUniform => self.uniform_fminus(z),
            RatioMethod::Quadrature => self.quad_fminus(z),
        }
    }

    /// `F(z) = P(X / Y <= z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        match self.method() {
            RatioMethod::NormalOverNormal => self.cauchy_cdf(z),
            RatioMethod::UniformOverSymmetricUniform => self.uniform_cdf(z),
            RatioMethod::DiracNumerator => self.dirac_num_cdf(z),
            _ => self.fplus(z) + self.fminus(z),
        }
        .clamp(0.0, 1.0)
    }

    /// `P(X / Y < z)`.
    pub fn cdf_left(&self, z: f64) -> f64 {
        (self.cdf(z) - self.mass_at(z)).max(0.0)
    }

    /// Tail probability `P(X/Y <= z)` for `z < 0`, `P(X/Y >= z)` for `z > 0`.
    pub fn tail(&self, z: f64) -> Result<f64> {
        if z < 0.0 {
            Ok(self.cdf(z))
        } else if z > 0.0 {
            Ok(1.0 - self.cdf_left(z))
        } else {
            Err(Error::Domain("tail needs z != 0".into()))
        }
    }

    /// Lebesgue density of `X / Y`.
    ///
    /// Fails where the law has an atom or no density.
    pub fn pdf(&self, z: f64) -> Result<f64> {
        match self.method() {
            RatioMethod::DiracOverDirac => Err(Error::Domain("ratio of point masses has no density".into())),
            RatioMethod::DiracDenominator => {
                let c = self.dirac_den();
                self.num
                    .pdf(z * c)
                    .map(|f| f * c.abs())
                    .ok_or_else(|| Error::Domain("no density".into()))
            }
            RatioMethod::DiracNumerator => {
                let b = match self.num {
                    ScalarDist::Dirac { b } => b,
                    _ => unreachable!(),
                };
                if z == 0.0 {
                    if b == 0.0 {
                        return Err(Error::Domain("ratio has an atom at 0".into()));
                    }
                    // |b| z^-2 f_Q(b/z) vanishes as z -> 0 for normal and uniform Q.
                    return Ok(0.0);
                }
                if b == 0.0 {
                    return Ok(0.0);
                }
                let fq = self.den.pdf(b / z).expect("atomless denominator");
                Ok(b.abs() / (z * z) * fq)
            }
            RatioMethod::NormalOverNormal => {
                let g = self.cauchy_scale();
                Ok(g / (std::f64::consts::PI * (g * g + z * z)))
            }
            RatioMethod::UniformOverSymmetricUniform => {
                let (_, alpha, beta) = self.uniform_side().expect("uniform pair");
                let m = if z == 0.0 { alpha * alpha } else { (alpha * alpha).min(beta * beta / (z * z)) };
                Ok(m / (4.0 * alpha * beta))
            }
            RatioMethod::Quadrature => Ok(self.quad_pdf(z)),
        }
    }

    /// Draws `n` ratios using the stream `(seed, 0)`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Empty("sample size"));
        }
        let mut rng = stream_rng(seed, 0);
        Ok((0..n).map(|_| self.sample_one(&mut rng)).collect())
    }

    /// Draws one ratio.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = self.num.sample(rng);
        loop {
            let y = self.den.sample(rng);
            if y != 0.0 {
                return x / y;
            }
        }
    }

    /// Lower bound on the tail mass `P(X/Y <= z)` (z < 0) or `P(X/Y >= z)`
    /// (z > 0) using the window `Y ∈ [-eps, eps]`.
    pub fn tail_lower_bound(&self, z: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        if z == 0.0 || !z.is_finite() {
            return Err(Error::Domain("tail bound needs finite z != 0".into()));
        }
        let p = &self.num;
        let q = &self.den;
        let q_neg = q.cdf_left(0.0) - q.cdf_left(-eps);
        let q_pos = q.cdf(eps) - q.cdf(0.0);
        let at_least = |x: f64| 1.0 - p.cdf_left(x);
        Ok(if z < 0.0 {
            at_least(-eps * z) * q_neg + p.cdf(eps * z) * q_pos
        } else {
            at_least(eps * z) * q_pos + p.cdf(-eps * z) * q_neg
        })
    }

    fn dirac_pair(&self) -> (f64, f64) {
        match (self.num, self.den) {
            (ScalarDist::Dirac { b }, ScalarDist::Dirac { b: c }) => (b, c),
            _ => unreachable!(),
        }
    }

    fn dirac_den(&self) -> f64 {
        match self.den {
            ScalarDist::Dirac { b } => b,
            _ => unreachable!(),
        }
    }

    fn dirac_num(&self) -> f64 {
        match self.num {
            ScalarDist::Dirac { b } => b,
            _ => unreachable!(),
        }
    }

    fn dirac_num_fplus(&self, z: f64) -> f64 {
        let b = self.dirac_num();
        let fq = |y: f64| self.den.cdf(y);
        if z > 0.0 {
            1.0 - fq((b / z).max(0.0))
        } else if z == 0.0 {
            if b <= 0.0 { 1.0 - fq(0.0) } else { 0.0 }
        } else if b < 0.0 {
            (fq(b / z) - fq(0.0)).max(0.0)
        } else {
            0.0
        }
    }

    fn dirac_num_fminus(&self, z: f64) -> f64 {
        let b = self.dirac_num();
        let fq = |y: f64| self.den.cdf(y);
        if z > 0.0 {
            fq((b / z).min(0.0))
        } else if z == 0.0 {
            if b >= 0.0 { fq(0.0) } else { 0.0 }
        } else if b > 0.0 {
            (fq(0.0) - fq(b / z)).max(0.0)
        } else {
            0.0
        }
    }

    fn dirac_num_cdf(&self, z: f64) -> f64 {
        let b = self.dirac_num();
        let fq = |y: f64| self.den.cdf(y);
        if b == 0.0 {
            return if z >= 0.0 { 1.0 } else { 0.0 };
        }
        if z == 0.0 {
            return if b > 0.0 { fq(0.0) } else { 1.0 - fq(0.0) };
        }
        // X/Y <= z with X = b: sign(Y) decides the direction.
        let r = b / z;
        match (b > 0.0, z > 0.0) {
            (true, false) => fq(0.0) - fq(r),
            (true, true) => fq(0.0) + 1.0 - fq(r),
            (false, true) => fq(r) + 1.0 - fq(0.0),
            (false, false) => fq(r) - fq(0.0),
        }
    }

    fn cauchy_scale(&self) -> f64 {
        match (self.num, self.den) {
            (ScalarDist::Normal { sigma: sp }, ScalarDist::Normal { sigma: sq }) => sp / sq,
            _ => unreachable!(),
        }
    }

    fn cauchy_cdf(&self, z: f64) -> f64 {
        0.5 + (z / self.cauchy_scale()).atan() / std::f64::consts::PI
    }

    fn uniform_cdf(&self, z: f64) -> f64 {
        let (_, alpha, beta) = self.uniform_side().expect("uniform pair");
        let edge = beta / alpha;
        if z <= -edge {
            -beta / (4.0 * alpha * z)
        } else if z < edge {
            (2.0 * beta + alpha * z) / (4.0 * beta)
        } else {
            1.0 - beta / (4.0 * alpha * z)
        }
    }

    /// `F⁺` for `U[0, β] / U[-α, α]`.
    fn positive_uniform_fplus(alpha: f64, beta: f64, z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else if z <= beta / alpha {
            alpha * z / (4.0 * beta)
        } else {
            0.5 - beta / (4.0 * alpha * z)
        }
    }

    /// `F⁻` for `U[0, β] / U[-α, α]`.
    fn positive_uniform_fminus(alpha: f64, beta: f64, z: f64) -> f64 {
        if z >= 0.0 {
            0.5
        } else if z >= -beta / alpha {
            0.5 + alpha * z / (4.0 * beta)
        } else {
            -beta / (4.0 * alpha * z)
        }
    }

    fn uniform_fplus(&self, z: f64) -> f64 {
        let (side, alpha, beta) = self.uniform_side().expect("uniform pair");
        match side {
            UniformSide::Positive => Self::positive_uniform_fplus(alpha, beta, z),
            UniformSide::Negative => Self::positive_uniform_fminus(alpha, beta, z),
            UniformSide::Symmetric => 0.5 * self.uniform_cdf(z),
        }
    }

    fn uniform_fminus(&self, z: f64) -> f64 {
        let (side, alpha, beta) = self.uniform_side().expect("uniform pair");
        match side {
            UniformSide::Positive => Self::positive_uniform_fminus(alpha, beta, z),
            UniformSide::Negative => Self::positive_uniform_fplus(alpha, beta, z),
            UniformSide::Symmetric => 0.5 * self.uniform_cdf(z),
        }
    }

    /// Breakpoints in `t` where `t -> P((-∞, z t])` has kinks.
    fn t_breaks(&self, z: f64) -> Vec<f64> {
        if z == 0.0 {
            return Vec::new();
        }
        self.num.kinks().into_iter().map(|k| k / z).collect()
    }

    fn quad_fplus(&self, z: f64) -> f64 {
        let (lo, hi) = self.den.effective_support();
        let (a, b) = (lo.max(0.0), hi);
        if a >= b {
            return 0.0;
        }
        let f = |t: f64| self.num.cdf(z * t) * self.den.pdf(t).unwrap_or(0.0);
        integrate_with_breaks(f, a, b, &self.t_breaks(z), QUAD_ABS_TOL, 0.0).value
    }

    fn quad_fminus(&self, z: f64) -> f64 {
        let (lo, hi) = self.den.effective_support();
        let (a, b) = (lo, hi.min(0.0));
        if a >= b {
            return 0.0;
        }
        let f = |t: f64| (1.0 - self.num.cdf_left(z * t)) * self.den.pdf(t).unwrap_or(0.0);
        integrate_with_breaks(f, a, b, &self.t_breaks(z), QUAD_ABS_TOL, 0.0).value
    }

    fn quad_pdf(&self, z: f64) -> f64 {
        let (a, b) = self.den.effective_support();
        let f = |t: f64| t.abs() * self.num.pdf(t * z).unwrap_or(0.0) * self.den.pdf(t).unwrap_or(0.0);
        let mut breaks = self.t_breaks(z);
        breaks.push(0.0);
        integrate_with_breaks(f, a, b, &breaks, QUAD_ABS_TOL, 0.0).value
    }
}
