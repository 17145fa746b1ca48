//! Neuron states on a finite data set and the convex-geometric facts behind them.
//!
//! A neuron `x -> max(0, <a, x> + b)` is
//!
//! - *fully active* when its edge `{<a, x> + b = 0}` separates some samples,
//! - *semi-active* when no sample is strictly negative but some are positive,
//! - *inactive* when no sample is strictly positive.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// A finite set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataSet {
    /// Builds a data set from `n * d` row-major values.
    pub fn from_flat(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Empty("data set needs at least one point and one coordinate"));
        }
        if values.len() != n * d {
            return Err(Error::ShapeMismatch { expected: n * d, actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("data set contains non-finite values".into()));
        }
        Ok(Self { n, d, values })
    }

    /// Builds a data set from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::ShapeMismatch { expected: d, actual: bad.len() });
        }
        Self::from_flat(rows.len(), d, rows.concat())
    }

    /// One-dimensional data set.
    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Self::from_flat(xs.len(), 1, xs.to_vec())
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; data sets are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// The `j`-th point.
    pub fn point(&self, j: usize) -> &[f64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    /// Iterator over points.
    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    /// Row-major values.
    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Smallest and largest value of coordinate `k`.
    pub fn coordinate_range(&self, k: usize) -> (f64, f64) {
        self.points().map(|p| p[k]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// The points with the given indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &j in indices {
            if j >= self.n {
                return Err(Error::Domain(format!("index {j} out of range for {} points", self.n)));
            }
            values.extend_from_slice(self.point(j));
        }
        Self::from_flat(indices.len(), self.d, values)
    }
}

/// A single ReLU unit `x -> max(0, <a, x> + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Neuron {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Neuron {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }

    /// `<a, x> + b`.
    pub fn pre_activation(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.b
    }

    /// `max(0, <a, x> + b)`.
    pub fn output(&self, x: &[f64]) -> f64 {
        self.pre_activation(x).max(0.0)
    }

    /// Knot `-b / a` of a one-dimensional neuron.
    pub fn knot(&self) -> Result<f64> {
        if self.a.len() != 1 {
            return Err(Error::ShapeMismatch { expected: 1, actual: self.a.len() });
        }
        if self.a[0] == 0.0 {
            return Err(Error::ConstantNeuron);
        }
        Ok(-self.b / self.a[0])
    }

    fn check_dim(&self, data: &DataSet) -> Result<()> {
        if self.a.len() != data.dim() {
            return Err(Error::ShapeMismatch { expected: data.dim(), actual: self.a.len() });
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Activation state of a neuron on a data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeuronState {
    FullyActive,
    SemiActive,
    Inactive,
}

impl NeuronState {
    /// Lower-case label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Self::FullyActive => "fully_active",
            Self::SemiActive => "semi_active",
            Self::Inactive => "inactive",
        }
    }
}

/// Sign counts of the pre-activations on a data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SignCounts {
    positive: usize,
    negative: usize,
    zero: usize,
}

/// Classifies neurons, treating pre-activations with `|h| <= edge_tolerance`
/// as lying on the edge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Classifier {
    pub edge_tolerance: f64,
}

impl Classifier {
    pub fn new(edge_tolerance: f64) -> Result<Self> {
        if !(edge_tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!("edge tolerance must be >= 0, got {edge_tolerance}")));
        }
        Ok(Self { edge_tolerance })
    }

    fn counts(&self, data: &DataSet, neuron: &Neuron) -> Result<SignCounts> {
        neuron.check_dim(data)?;
        let mut c = SignCounts { positive: 0, negative: 0, zero: 0 };
        for x in data.points() {
            let h = neuron.pre_activation(x);
            if h > self.edge_tolerance {
                c.positive += 1;
            } else if h < -self.edge_tolerance {
                c.negative += 1;
            } else {
                c.zero += 1;
            }
        }
        Ok(c)
    }

    /// State from the signs of the pre-activations.
    pub fn classify(&self, data: &DataSet, neuron: &Neuron) -> Result<NeuronState> {
        let c = self.counts(data, neuron)?;
        Ok(if c.positive > 0 && c.negative > 0 {
            NeuronState::FullyActive
        } else if c.positive > 0 {
            NeuronState::SemiActive
        } else {
            NeuronState::Inactive
        })
    }

    /// Inactive, and gradient descent cannot revive it: either the ReLU
    /// derivative at zero is `0` or no sample lies on the edge.
    pub fn is_dead(&self, data: &DataSet, neuron: &Neuron, partial0: f64) -> Result<bool> {
        let c = self.counts(data, neuron)?;
        Ok(c.positive == 0 && (partial0 == 0.0 || c.zero == 0))
    }
}

/// [`Classifier::classify`] with exact comparisons.
pub fn classify(data: &DataSet, neuron: &Neuron) -> Result<NeuronState> {
    Classifier::default().classify(data, neuron)
}

/// [`Classifier::is_dead`] with exact comparisons.
pub fn is_dead(data: &DataSet, neuron: &Neuron, partial0: f64) -> Result<bool> {
    Classifier::default().is_dead(data, neuron, partial0)
}

/// State of a one-dimensional neuron from the position of its knot relative
/// to `[x_min, x_max]`.
///
/// When all samples coincide, the neuron is semi-active if it is positive at
/// that point and inactive otherwise.
pub fn classify_1d(data: &DataSet, neuron: &Neuron) -> Result<NeuronState> {
    if data.dim() != 1 {
        return Err(Error::ShapeMismatch { expected: 1, actual: data.dim() });
    }
    let knot = neuron.knot()?;
    let a = neuron.a[0];
    let (x_min, x_max) = data.coordinate_range(0);
    if x_min == x_max {
        return Ok(if neuron.pre_activation(&[x_min]) > 0.0 {
            NeuronState::SemiActive
        } else {
            NeuronState::Inactive
        });
    }
    Ok(if x_min < knot && knot < x_max {
        NeuronState::FullyActive
    } else if (a < 0.0 && knot >= x_max) || (a > 0.0 && knot <= x_min) {
        NeuronState::SemiActive
    } else {
        NeuronState::Inactive
    })
}

/// Whether `<y, x_j> >= 0` for every sample, i.e. `y` lies in the dual cone.
pub fn dual_cone_contains(data: &DataSet, y: &[f64]) -> Result<bool> {
    if y.len() != data.dim() {
        return Err(Error::ShapeMismatch { expected: data.dim(), actual: y.len() });
    }
    Ok(data.points().all(|x| dot(y, x) >= 0.0))
}

/// Whether the conic hull of non-negative data is the whole positive orthant,
/// i.e. every unit vector is a positive multiple of some sample.
pub fn coni_is_positive_orthant(data: &DataSet) -> Result<bool> {
    const AXIS_TOL: f64 = 1e-12;
    if data.as_flat().iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("data must lie in the positive orthant".into()));
    }
    Ok((0..data.dim()).all(|k| {
        data.points()
            .any(|x| x[k] > 0.0 && x.iter().enumerate().all(|(i, &v)| i == k || v.abs() < AXIS_TOL))
    }))
}

/// Random point of the relative interior of the convex hull of `points`,
/// with flat Dirichlet weights.
pub fn sample_ico<R: Rng + ?Sized>(points: &DataSet, rng: &mut R) -> Vec<f64> {
    let weights = dirichlet_weights(points.len(), rng);
    combine(points, &weights)
}

/// [`sample_ico`] drawing from stream `(seed, 0)`.
pub fn sample_ico_seeded(points: &DataSet, seed: u64) -> Vec<f64> {
    sample_ico(points, &mut stream_rng(seed, 0))
}

/// Strictly positive weights summing to one, uniform on the simplex.
pub(crate) fn dirichlet_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        let weights: Vec<f64> = draws.iter().map(|e| e / total).collect();
        if weights.iter().all(|&w| w > 0.0) {
            return weights;
        }
    }
}

fn combine(points: &DataSet, weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; points.dim()];
    for (x, &w) in points.points().zip(weights) {
        for (o, &xi) in out.iter_mut().zip(x) {
            *o += w * xi;
        }
    }
    out
}

/// Point of the relative interior of the convex hull lying on a neuron's edge.
#[derive(Debug, Clone, PartialEq)]
pub struct IcoWitness {
    /// The point `x*`.
    pub point: Vec<f64>,
    /// Strictly positive convex weights with `x* = sum_j w_j x_j`.
    pub weights: Vec<f64>,
}

/// Whether the edge of the neuron meets the relative interior of the convex
/// hull of the data; equivalent to the neuron being fully active.
pub fn edge_hits_ico(data: &DataSet, neuron: &Neuron) -> Result<bool> {
    if data.len() < 2 {
        return Err(Error::Domain("edge/hull test needs at least two points".into()));
    }
    Ok(classify(data, neuron)? == NeuronState::FullyActive)
}

/// Constructs an edge point in the relative interior of the hull of a fully
/// active neuron by bisecting between the positive and non-positive samples.
///
/// Returns `None` when the neuron is not fully active.
pub fn ico_edge_witness(data: &DataSet, neuron: &Neuron) -> Result<Option<IcoWitness>> {
    neuron.check_dim(data)?;
    let h: Vec<f64> = data.points().map(|x| neuron.pre_activation(x)).collect();
    let n_pos = h.iter().filter(|&&v| v > 0.0).count();
    let n_rest = h.len() - n_pos;
    if n_pos == 0 || h.iter().all(|&v| v >= 0.0) {
        return Ok(None);
    }
    let weights_at = |t: f64| -> Vec<f64> {
        h.iter()
            .map(|&v| if v > 0.0 { (1.0 - t) / n_pos as f64 } else { t / n_rest as f64 })
            .collect()
    };
    let value_at = |t: f64| -> f64 { weights_at(t).iter().zip(&h).map(|(w, v)| w * v).sum() };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if value_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if value_at(lo).abs() <= value_at(hi).abs() { lo } else { hi };
    let weights = weights_at(t);
    Ok(Some(IcoWitness { point: combine(data, &weights), weights }))
}

/// If the neuron agrees with an affine map on the data, returns `(v, c)` with
/// `max(0, <a, x_j> + b) = <v, x_j> + c` for every sample (tolerance `1e-9`).
pub fn behaves_linearly(data: &DataSet, neuron: &Neuron) -> Result<Option<(Vec<f64>, f64)>> {
    neuron.check_dim(data)?;
    let d = data.dim();
    match classify(data, neuron)? {
        NeuronState::SemiActive => return Ok(Some((neuron.a.clone(), neuron.b))),
        NeuronState::Inactive => return Ok(Some((vec![0.0; d], 0.0))),
        NeuronState::FullyActive => {}
    }
    let n = data.len();
    let design = DMatrix::from_fn(n, d + 1, |j, k| if k < d { data.point(j)[k] } else { 1.0 });
    let target = DVector::from_iterator(n, data.points().map(|x| neuron.output(x)));
    let scale = target.amax().max(1.0);
    let svd = design.clone().svd(true, true);
    let Ok(coef) = svd.solve(&target, 1e-12 * scale) else {
        return Ok(None);
    };
    let residual = (&design * &coef - &target).amax();
    if residual <= 1e-9 * scale {
        Ok(Some((coef.rows(0, d).iter().copied().collect(), coef[d])))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> DataSet {
        DataSet::from_1d(xs).unwrap()
    }

    #[test]
    fn states_in_one_dimension() {
        let data = line(&[0.0, 0.5, 1.0]);
        let cases = [
            (1.0, -0.5, NeuronState::FullyActive),
            (1.0, 0.0, NeuronState::SemiActive),
            (1.0, -1.0, NeuronState::Inactive),
            (-1.0, 1.0, NeuronState::SemiActive),
            (-1.0, 0.0, NeuronState::Inactive),
            (-1.0, 0.25, NeuronState::FullyActive),
        ];
        for (a, b, want) in cases {
            let nrn = Neuron::new(vec![a], b);
            assert_eq!(classify_1d(&data, &nrn).unwrap(), want, "a={a} b={b}");
            assert_eq!(classify(&data, &nrn).unwrap(), want, "a={a} b={b}");
        }
        assert_eq!(classify_1d(&data, &Neuron::new(vec![0.0], 1.0)), Err(Error::ConstantNeuron));
    }

    #[test]
    fn single_point_data() {
        let data = line(&[0.3]);
        assert_eq!(classify_1d(&data, &Neuron::new(vec![1.0], 0.0)).unwrap(), NeuronState::SemiActive);
        assert_eq!(classify_1d(&data, &Neuron::new(vec![1.0], -0.3)).unwrap(), NeuronState::Inactive);
        assert_eq!(classify_1d(&data, &Neuron::new(vec![1.0], -1.0)).unwrap(), NeuronState::Inactive);
    }

    #[test]
    fn dead_depends_on_edge_samples() {
        let data = line(&[0.0, 1.0]);
        let nrn = Neuron::new(vec![1.0], -1.0);
        assert!(!is_dead(&data, &nrn, 0.5).unwrap());
        assert!(is_dead(&data, &nrn, 0.0).unwrap());
        assert!(is_dead(&data, &Neuron::new(vec![1.0], -2.0), 0.5).unwrap());
    }

    #[test]
    fn tolerance_moves_samples_to_edge() {
        let data = line(&[1.0]);
        let nrn = Neuron::new(vec![1.0], -1.0 + 1e-14);
        assert_eq!(classify(&data, &nrn).unwrap(), NeuronState::SemiActive);
        let c = Classifier::new(1e-12).unwrap();
        assert_eq!(c.classify(&data, &nrn).unwrap(), NeuronState::Inactive);
        assert!(Classifier::new(-1.0).is_err());
    }

    #[test]
    fn positive_orthant_cone() {
        let basis = DataSet::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5], vec![1.0, 1.0]]).unwrap();
        assert!(coni_is_positive_orthant(&basis).unwrap());
        let inner = DataSet::from_rows(&[vec![2.0, 0.1], vec![0.1, 0.5]]).unwrap();
        assert!(!coni_is_positive_orthant(&inner).unwrap());
        assert!(coni_is_positive_orthant(&DataSet::from_rows(&[vec![-1.0, 0.0]]).unwrap()).is_err());
        assert!(dual_cone_contains(&basis, &[0.0, 1.0]).unwrap());
        assert!(!dual_cone_contains(&basis, &[-1.0, 1.0]).unwrap());
    }

    #[test]
    fn witness_lies_on_edge() {
        let data = DataSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let nrn = Neuron::new(vec![1.0, 1.0], -0.7);
        let w = ico_edge_witness(&data, &nrn).unwrap().unwrap();
        assert!(nrn.pre_activation(&w.point).abs() < 1e-9);
        assert!(w.weights.iter().all(|&x| x > 0.0));
        assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(ico_edge_witness(&data, &Neuron::new(vec![1.0, 1.0], 0.5)).unwrap().is_none());
        assert!(edge_hits_ico(&data, &nrn).unwrap());
        assert!(edge_hits_ico(&line(&[1.0]), &Neuron::new(vec![1.0], 0.0)).is_err());
    }

    #[test]
    fn collinear_hull_sample_stays_on_segment() {
        let pts = DataSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        for seed in 0..50 {
            let x = sample_ico_seeded(&pts, seed);
            assert!((x[1] - 2.0 * x[0]).abs() < 1e-15);
            assert!(x[0] > 0.0 && x[0] < 1.0);
        }
    }

    #[test]
    fn linear_behaviour() {
        let data = line(&[0.0, 0.5, 1.0]);
        let semi = Neuron::new(vec![2.0], 1.0);
        assert_eq!(behaves_linearly(&data, &semi).unwrap(), Some((vec![2.0], 1.0)));
        let kinked = Neuron::new(vec![1.0], -0.25);
        assert_eq!(behaves_linearly(&data, &kinked).unwrap(), None);
        // Two points can always be interpolated.
        let pair = line(&[0.0, 1.0]);
        let (v, c) = behaves_linearly(&pair, &kinked).unwrap().unwrap();
        assert!((v[0] - 0.75).abs() < 1e-12 && c.abs() < 1e-12);
    }
}
