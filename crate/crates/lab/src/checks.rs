//! Monte Carlo and analytic consistency checks.
//!
//! Each check compares computed quantities against an independent oracle
//! (simulation, finite differences, a second evaluation route or a known
//! constant) and reports one [`Outcome`] per invariant. The same checks back
//! `reluinit validate` and the acceptance test suite.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use reluinit::analytics::{
    direction_density_uniform_weights, lipschitz_deviation, psi_output_size, weight_norm_stats, weight_norm_tail,
    weight_norm_tail_bound,
};
use reluinit::geometry::{classify, classify_1d, coni_is_positive_orthant, DataSet, NeuronState};
use reluinit::initstrat::{init_layer, BiasScheme, InitConfig, WeightScheme};
use reluinit::netcore::{
    backprop, empirical_risk, grad_1d_closed_form, DenseLayer, LabeledData, Loss, MlpParams, Partial0,
};
use reluinit::ratiodist::{RatioPair, ScalarDist};
use reluinit::rng::{derive_seed, stream_rng, StreamRng};
use reluinit::stats::{chi_square, EmpiricalCdf};

use crate::config::Config;
use crate::csv::fmt_f64;
use crate::error::{LabError, LabResult};
use crate::parallel::map_reps;
use crate::strategies::{SweepStrategy, Target, ToyInit};
use crate::toy::{dead_count, run_toy, toy_inputs, toy_network, ToySettings};

/// Acceptance rule for a statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    AtMost(f64),
    Below(f64),
    AtLeast(f64),
    Above(f64),
    Within(f64, f64),
}

impl Rule {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Self::AtMost(t) => v <= t,
            Self::Below(t) => v < t,
            Self::AtLeast(t) => v >= t,
            Self::Above(t) => v > t,
            Self::Within(lo, hi) => lo <= v && v <= hi,
        }
    }

    fn render(&self) -> String {
        match *self {
            Self::AtMost(t) => format!("<={}", fmt_f64(t)),
            Self::Below(t) => format!("<{}", fmt_f64(t)),
            Self::AtLeast(t) => format!(">={}", fmt_f64(t)),
            Self::Above(t) => format!(">{}", fmt_f64(t)),
            Self::Within(lo, hi) => format!("[{},{}]", fmt_f64(lo), fmt_f64(hi)),
        }
    }

    fn with_threshold(self, t: f64) -> Self {
        match self {
            Self::AtMost(_) => Self::AtMost(t),
            Self::Below(_) => Self::Below(t),
            Self::AtLeast(_) => Self::AtLeast(t),
            Self::Above(_) => Self::Above(t),
            within => within,
        }
    }
}

/// Result of one invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub criterion: u32,
    pub statistic: f64,
    pub rule: Rule,
    pub passed: bool,
    pub note: String,
}

impl Outcome {
    /// `PASS|FAIL name statistic=... threshold=... [note]`.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {} statistic={} threshold={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            fmt_f64(self.statistic),
            self.rule.render()
        );
        if !self.note.is_empty() {
            s.push(' ');
            s.push_str(&self.note);
        }
        s
    }
}

/// Settings and seed of one check.
pub struct Ctx<'a> {
    cfg: &'a Config,
    name: &'static str,
    criterion: u32,
    seed: u64,
    outcomes: Vec<Outcome>,
}

impl Ctx<'_> {
    /// Size parameter `<check>.<key>`.
    pub fn size(&self, key: &str, default: usize) -> LabResult<usize> {
        self.cfg.value(&format!("{}.{key}", self.name), default)
    }

    /// Float parameter `<check>.<key>`.
    pub fn param(&self, key: &str, default: f64) -> LabResult<f64> {
        self.cfg.value(&format!("{}.{key}", self.name), default)
    }

    /// Seed for the sub-experiment `label`.
    pub fn seed(&self, label: u64) -> u64 {
        derive_seed(self.seed, label)
    }

    /// Records an outcome; `<check>.threshold` overrides one-sided thresholds.
    pub fn record(&mut self, sub: &str, statistic: f64, rule: Rule, note: String) -> LabResult<()> {
        let rule = match self.cfg.get(&format!("{}.threshold", self.name)) {
            Some(_) => rule.with_threshold(self.param("threshold", 0.0)?),
            None => rule,
        };
        let name = if sub.is_empty() { self.name.to_string() } else { format!("{}[{sub}]", self.name) };
        let passed = !statistic.is_nan() && rule.holds(statistic);
        self.outcomes.push(Outcome { name, criterion: self.criterion, statistic, rule, passed, note });
        Ok(())
    }
}

/// A named check.
pub struct Check {
    pub name: &'static str,
    pub criterion: u32,
    pub run: fn(&mut Ctx<'_>) -> LabResult<()>,
}

/// All checks in report order.
pub const CHECKS: &[Check] = &[
    Check { name: "ratio_cdf_mc", criterion: 1, run: ratio_cdf_mc },
    Check { name: "split_identity", criterion: 2, run: split_identity },
    Check { name: "state_probs_mc", criterion: 3, run: state_probs_mc },
    Check { name: "bias_sign", criterion: 4, run: bias_sign },
    Check { name: "zero_bias_orthant", criterion: 5, run: zero_bias_orthant },
    Check { name: "gradients", criterion: 6, run: gradients },
    Check { name: "positive_homogeneity", criterion: 7, run: positive_homogeneity },
    Check { name: "norm_concentration", criterion: 8, run: norm_concentration },
    Check { name: "psi", criterion: 9, run: psi },
    Check { name: "directions", criterion: 10, run: directions },
    Check { name: "dead_count", criterion: 11, run: dead_count_law },
    Check { name: "toy_training", criterion: 12, run: toy_training },
];

/// Outcomes and wall-clock time of one check.
#[derive(Debug, Clone)]
pub struct CheckRun {
    pub name: &'static str,
    pub criterion: u32,
    pub outcomes: Vec<Outcome>,
    pub elapsed: Duration,
}

/// Outcomes of a suite run.
#[derive(Debug, Clone)]
pub struct Report {
    pub runs: Vec<CheckRun>,
}

impl Report {
    pub fn outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.runs.iter().flat_map(|r| r.outcomes.iter())
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes().all(|o| o.passed)
    }

    /// One line per invariant plus a summary line; no timings.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for o in self.outcomes() {
            s.push_str(&o.line());
            s.push('\n');
        }
        let failed = self.outcomes().filter(|o| !o.passed).count();
        s.push_str(&format!("SUMMARY checks={} failed={failed}\n", self.outcomes().count()));
        s
    }
}

/// Names selected by the `checks` and `skip` keys.
pub fn selected(cfg: &Config) -> LabResult<Vec<&'static Check>> {
    let all: Vec<&str> = CHECKS.iter().map(|c| c.name).collect();
    let wanted = cfg.names("checks", &all);
    let skip = cfg.names("skip", &[]);
    for n in wanted.iter().chain(&skip) {
        if !all.contains(&n.as_str()) {
            return Err(LabError::Config(format!("unknown check '{n}'")));
        }
    }
    Ok(CHECKS.iter().filter(|c| wanted.iter().any(|w| w == c.name) && !skip.iter().any(|s| s == c.name)).collect())
}

/// Runs the selected checks with the config's seed.
pub fn run_suite(cfg: &Config) -> LabResult<Report> {
    let seed = cfg.seed()?;
    let mut runs = Vec::new();
    for check in selected(cfg)? {
        runs.push(run_check(check, cfg, seed)?);
    }
    Ok(Report { runs })
}

/// Runs one check.
pub fn run_check(check: &Check, cfg: &Config, seed: u64) -> LabResult<CheckRun> {
    let start = Instant::now();
    let mut ctx = Ctx { cfg, name: check.name, criterion: check.criterion, seed: derive_seed(seed, check.criterion as u64), outcomes: Vec::new() };
    (check.run)(&mut ctx)?;
    Ok(CheckRun { name: check.name, criterion: check.criterion, outcomes: ctx.outcomes, elapsed: start.elapsed() })
}

/// `|freq - p|` in units of the binomial standard error; infinite when the
/// analytic probability is 0 or 1 and the frequency differs.
pub fn binomial_z(count: usize, n: usize, p: f64) -> f64 {
    let freq = count as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let diff = (freq - p).abs();
    if se > 0.0 {
        diff / se
    } else if diff < 1e-15 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// The five ratio families with their natural scale.
fn ratio_families() -> LabResult<Vec<(&'static str, RatioPair, f64)>> {
    Ok(vec![
        ("normal-normal", RatioPair::new(ScalarDist::normal(1.0)?, ScalarDist::normal(0.5)?)?, 2.0),
        ("dirac-normal", RatioPair::new(ScalarDist::dirac(1.0)?, ScalarDist::normal(1.0)?)?, 1.0),
        ("uniform-asym", RatioPair::new(ScalarDist::uniform(0.0, 1.0)?, ScalarDist::symmetric_uniform(0.5)?)?, 2.0),
        ("uniform-sym", RatioPair::new(ScalarDist::symmetric_uniform(1.0)?, ScalarDist::symmetric_uniform(0.5)?)?, 2.0),
        ("dirac-uniform", RatioPair::new(ScalarDist::dirac(1.0)?, ScalarDist::symmetric_uniform(2.0)?)?, 0.5),
    ])
}

fn ratio_cdf_mc(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("samples", 1_000_000)?;
    let grid = [-4.0, -2.0, -1.0, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
    for (k, (name, pair, scale)) in ratio_families()?.into_iter().enumerate() {
        let emp = EmpiricalCdf::new(&pair.sample(n, ctx.seed(k as u64))?)?;
        let worst = grid.iter().map(|&g| (pair.cdf(g * scale) - emp.eval(g * scale)).abs()).fold(0.0, f64::max);
        ctx.record(name, worst, Rule::Below(0.005), format!("samples={n} points={}", grid.len()))?;
    }
    Ok(())
}

fn random_law(rng: &mut StreamRng, allow_dirac: bool) -> LabResult<ScalarDist> {
    let kind = rng.random_range(0..if allow_dirac { 5 } else { 4 });
    Ok(match kind {
        0 => ScalarDist::normal(rng.random_range(0.1..5.0))?,
        1 => ScalarDist::symmetric_uniform(rng.random_range(0.1..5.0))?,
        2 => ScalarDist::uniform(0.0, rng.random_range(0.1..5.0))?,
        3 => {
            let lo = rng.random_range(-3.0..3.0);
            ScalarDist::uniform(lo, lo + rng.random_range(0.1..3.0))?
        }
        _ => ScalarDist::dirac(rng.random_range(-2.0..2.0))?,
    })
}

fn symmetric_law(rng: &mut StreamRng) -> LabResult<ScalarDist> {
    Ok(if rng.random::<bool>() {
        ScalarDist::normal(rng.random_range(0.1..5.0))?
    } else {
        ScalarDist::symmetric_uniform(rng.random_range(0.1..5.0))?
    })
}

fn random_z(rng: &mut StreamRng) -> f64 {
    if rng.random_range(0..20) == 0 {
        return 0.0;
    }
    let mag = rng.random_range(-3.0_f64..3.0).exp();
    if rng.random::<bool>() { mag } else { -mag }
}

fn split_identity(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("instances", 1000)?;
    let mut rng = stream_rng(ctx.seed(0), 0);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let pair = loop {
            if let Ok(p) = RatioPair::new(random_law(&mut rng, true)?, random_law(&mut rng, false)?) {
                break p;
            }
        };
        let z = random_z(&mut rng);
        worst = worst.max((pair.fplus(z) + pair.fminus(z) - pair.cdf(z)).abs());
    }
    ctx.record("sum", worst, Rule::AtMost(1e-10), format!("instances={n}"))?;

    let mut worst = 0.0_f64;
    for _ in 0..n {
        let num = if rng.random_range(0..10) == 0 { ScalarDist::dirac(0.0)? } else { symmetric_law(&mut rng)? };
        let pair = RatioPair::new(num, symmetric_law(&mut rng)?)?;
        let z = random_z(&mut rng);
        worst = worst.max((pair.fplus(z) - 0.5 * pair.cdf(z)).abs());
    }
    ctx.record("symmetric-half", worst, Rule::AtMost(1e-10), format!("instances={n}"))
}

/// Counts of (fully active, semi-active, inactive) over a layer of scalar neurons.
fn state_counts_1d(layer: &DenseLayer, data: &DataSet) -> LabResult<[usize; 3]> {
    let mut counts = [0; 3];
    for i in 0..layer.fan_out() {
        let k = match classify_1d(data, &layer.neuron(i))? {
            NeuronState::FullyActive => 0,
            NeuronState::SemiActive => 1,
            NeuronState::Inactive => 2,
        };
        counts[k] += 1;
    }
    Ok(counts)
}

fn state_probs_mc(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("neurons", 100_000)?;
    let rho = ctx.param("rho", 1.0)?;
    let mut label = 0;
    for strategy in SweepStrategy::ALL {
        for (x_min, x_max) in [(0.0, 1.0), (-1.0, 1.0)] {
            let probs = strategy.state_probabilities(rho, x_min, x_max)?;
            let layer = init_layer(&strategy.init_config(rho)?, 1, n, None, ctx.seed(label))?;
            label += 1;
            let counts = state_counts_1d(&layer, &DataSet::from_1d(&[x_min, x_max])?)?;
            let p = [probs.p_fully_active, probs.p_semi_active, probs.p_inactive];
            let z = (0..3).map(|k| binomial_z(counts[k], n, p[k])).fold(0.0, f64::max);
            let note = format!(
                "p=({},{},{}) freq=({},{},{})",
                fmt_f64(p[0]),
                fmt_f64(p[1]),
                fmt_f64(p[2]),
                fmt_f64(counts[0] as f64 / n as f64),
                fmt_f64(counts[1] as f64 / n as f64),
                fmt_f64(counts[2] as f64 / n as f64)
            );
            ctx.record(&format!("{strategy}:[{x_min},{x_max}]"), z, Rule::AtMost(3.0), note)?;
        }
    }
    Ok(())
}

fn bias_sign(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("neurons", 1_000_000)?;
    let data = DataSet::from_1d(&[-1.0, 1.0])?;
    let cases = [
        ("positive", BiasScheme::UniformRange(0.05, 1.0), 2, "inactive"),
        ("negative", BiasScheme::UniformRange(-1.0, -0.05), 1, "semi-active"),
    ];
    for (k, (name, bias, forbidden, label)) in cases.into_iter().enumerate() {
        let cfg = InitConfig { weight: WeightScheme::NormalSigma(1.0), bias, ..Default::default() };
        let layer = init_layer(&cfg, 1, n, None, ctx.seed(k as u64))?;
        let counts = state_counts_1d(&layer, &data)?;
        ctx.record(name, counts[forbidden] as f64, Rule::AtMost(0.0), format!("neurons={n} counted={label}"))?;
        let (mut below, mut above) = (0usize, 0usize);
        for i in 0..layer.fan_out() {
            let knot = layer.neuron(i).knot()?;
            below += usize::from(knot < -1.0);
            above += usize::from(knot > 1.0);
        }
        ctx.record(
            &format!("{name}:knots-outside"),
            below.min(above) as f64,
            Rule::AtLeast(1.0),
            format!("below={below} above={above}"),
        )?;
    }
    Ok(())
}

fn zero_bias_orthant(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("neurons", 100_000)?;
    let extra = ctx.size("extra_points", 20)?;
    for d in 2..=8 {
        let mut rng = stream_rng(ctx.seed(100 + d as u64), 0);
        let mut rows: Vec<Vec<f64>> = (0..d)
            .map(|k| (0..d).map(|j| if j == k { rng.random_range(0.5..2.0) } else { 0.0 }).collect())
            .collect();
        rows.extend((0..extra).map(|_| (0..d).map(|_| rng.random::<f64>()).collect::<Vec<f64>>()));
        let data = DataSet::from_rows(&rows)?;
        if !coni_is_positive_orthant(&data)? {
            return Err(LabError::Config("orthant data set does not span the orthant".into()));
        }
        let layer = init_layer(&InitConfig::default(), d, n, None, ctx.seed(d as u64))?;
        let mut inactive = 0;
        for i in 0..n {
            inactive += usize::from(classify(&data, &layer.neuron(i))? == NeuronState::Inactive);
        }
        let p = 0.5_f64.powi(d as i32);
        ctx.record(
            &format!("d={d}"),
            binomial_z(inactive, n, p),
            Rule::AtMost(3.0),
            format!("freq={} p={}", fmt_f64(inactive as f64 / n as f64), fmt_f64(p)),
        )?;
    }
    Ok(())
}

/// Random shallow scalar instance; one in five has samples exactly on knots.
fn random_shallow(rng: &mut StreamRng) -> LabResult<(MlpParams, LabeledData, Loss, Partial0)> {
    let m = rng.random_range(1..=8);
    let n = rng.random_range(1..=32);
    let on_grid = rng.random_range(0..5) == 0;
    let xs: Vec<f64> = (0..n)
        .map(|_| if on_grid { rng.random_range(-128..=128) as f64 / 64.0 } else { rng.random_range(-2.0..2.0) })
        .collect();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        if on_grid && rng.random::<bool>() {
            let ai = rng.random_range(1..=16) as f64 / 8.0 * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let x = xs[rng.random_range(0..n)];
            a.push(ai);
            b.push(-ai * x);
        } else {
            a.push(rng.sample::<f64, _>(StandardNormal));
            b.push(rng.sample::<f64, _>(StandardNormal));
        }
    }
    let w: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let c = rng.sample::<f64, _>(StandardNormal);
    let loss = if rng.random::<bool>() { Loss::LeastSquares } else { Loss::Logistic };
    let labels: Vec<f64> = match loss {
        Loss::LeastSquares => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        Loss::Logistic => (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
    };
    let data = LabeledData::new(DataSet::from_1d(&xs)?, labels)?;
    let partial0 = Partial0::new(rng.random::<f64>())?;
    Ok((MlpParams::shallow_1d(a, b, w, c)?, data, loss, partial0))
}

fn random_deep(rng: &mut StreamRng) -> LabResult<(MlpParams, LabeledData, Loss)> {
    let d = rng.random_range(1..=3);
    let depth = rng.random_range(2..=4);
    let widths: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=6)).collect();
    let mut params = MlpParams::zeros(d, &widths)?;
    let flat: Vec<f64> = (0..params.num_params()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    params.set_flat(&flat)?;
    let n = rng.random_range(1..=16);
    let xs: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let labels: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let loss = if rng.random::<bool>() { Loss::LeastSquares } else { Loss::Logistic };
    Ok((params, LabeledData::new(DataSet::from_flat(n, d, xs)?, labels)?, loss))
}

/// Smallest absolute pre-activation over all hidden units and samples.
fn min_pre_activation(params: &MlpParams, data: &DataSet) -> f64 {
    let mut min = f64::INFINITY;
    for x in data.points() {
        let mut h = x.to_vec();
        for layer in &params.hidden {
            let mut next = Vec::with_capacity(layer.fan_out());
            for i in 0..layer.fan_out() {
                let z = layer.neuron(i).pre_activation(&h);
                min = min.min(z.abs());
                next.push(z.max(0.0));
            }
            h = next;
        }
    }
    min
}

/// Central finite differences of the empirical risk in every parameter.
fn finite_differences(params: &MlpParams, data: &LabeledData, loss: Loss, h: f64) -> LabResult<Vec<f64>> {
    let base = params.to_flat();
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut v = base.clone();
        v[k] = base[k] + h;
        probe.set_flat(&v)?;
        let up = empirical_risk(&probe, data, loss)?;
        v[k] = base[k] - h;
        probe.set_flat(&v)?;
        let down = empirical_risk(&probe, data, loss)?;
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

fn fd_error(fd: &[f64], g: &[f64]) -> f64 {
    fd.iter().zip(g).map(|(f, g)| (f - g).abs() / g.abs().max(1.0)).fold(0.0, f64::max)
}

fn gradients(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("instances", 1000)?;
    let kink_gap = ctx.param("kink_gap", 1e-3)?;
    let h = ctx.param("fd_step", 1e-6)?;
    let mut rng = stream_rng(ctx.seed(0), 0);
    let (mut worst_cf, mut worst_fd_cf, mut worst_fd_bp) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut edge_instances, mut fd_instances) = (0, 0);
    for _ in 0..n {
        let (params, data, loss, partial0) = random_shallow(&mut rng)?;
        let cf = grad_1d_closed_form(&params, &data, loss, partial0)?;
        let bp = backprop(&params, &data, loss, partial0)?;
        let cf_flat: Vec<f64> = cf.a.iter().chain(&cf.b).chain(&cf.w).copied().chain([cf.c]).collect();
        let layer = &bp.hidden[0];
        let bp_flat: Vec<f64> =
            layer.weights.iter().chain(&layer.biases).chain(&bp.output_weights).copied().chain([bp.output_bias]).collect();
        let scale = cf_flat.iter().chain(&bp_flat).fold(1.0_f64, |m, v| m.max(v.abs()));
        let diff = cf_flat.iter().zip(&bp_flat).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst_cf = worst_cf.max(diff / scale);
        let min_z = min_pre_activation(&params, &data.inputs);
        if min_z == 0.0 {
            edge_instances += 1;
        }
        if min_z >= kink_gap {
            fd_instances += 1;
            let fd = finite_differences(&params, &data, loss, h)?;
            // Parameter layout of to_flat: weights, biases, output weights, output bias.
            worst_fd_cf = worst_fd_cf.max(fd_error(&fd, &cf_flat));
            worst_fd_bp = worst_fd_bp.max(fd_error(&fd, &bp.to_flat()));
        }
    }
    ctx.record(
        "closed-form-vs-backprop",
        worst_cf,
        Rule::AtMost(1e-12),
        format!("instances={n} with-samples-on-knots={edge_instances}"),
    )?;
    ctx.record("closed-form-vs-fd", worst_fd_cf, Rule::Below(1e-6), format!("instances={fd_instances}"))?;
    ctx.record("backprop-vs-fd", worst_fd_bp, Rule::Below(1e-6), format!("instances={fd_instances}"))?;

    let mut worst = 0.0_f64;
    let mut used = 0;
    for _ in 0..n {
        let (params, data, loss) = random_deep(&mut rng)?;
        if min_pre_activation(&params, &data.inputs) < kink_gap {
            continue;
        }
        used += 1;
        let g = backprop(&params, &data, loss, Partial0::default())?.to_flat();
        worst = worst.max(fd_error(&finite_differences(&params, &data, loss, h)?, &g));
    }
    ctx.record("deep-backprop-vs-fd", worst, Rule::Below(1e-6), format!("instances={used}"))
}

/// Zero-bias network with He-normal weights.
fn random_zero_bias_net(rng: &mut StreamRng, d: usize, depth: usize) -> LabResult<MlpParams> {
    let mut hidden = Vec::with_capacity(depth);
    let mut fan_in = d;
    for _ in 0..depth {
        let width = rng.random_range(1..=8);
        let weights: Vec<f64> = (0..width).flat_map(|_| WeightScheme::HeNormal.draw_row(fan_in, width, rng)).collect();
        hidden.push(DenseLayer::new(fan_in, width, weights, vec![0.0; width])?);
        fan_in = width;
    }
    let w = WeightScheme::HeNormal.draw_row(fan_in, 1, rng);
    Ok(MlpParams::new(hidden, w, 0.0)?)
}

fn positive_homogeneity(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("instances", 10_000)?;
    let ulps = ctx.param("ulps", 4.0)?;
    let mut rng = stream_rng(ctx.seed(0), 0);
    let (mut violations, mut worst_ulps, mut worst_zero) = (0usize, 0.0_f64, 0.0_f64);
    for _ in 0..n {
        let d = rng.random_range(1..=5);
        let depth = rng.random_range(1..=4);
        let net = random_zero_bias_net(&mut rng, d, depth)?;
        let alpha = 10f64.powf(rng.random_range(-3.0..3.0));
        let x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let lhs = net.forward(&ax)?;
        let rhs = alpha * net.forward(&x)?;
        let err = (lhs - rhs).abs();
        let allowed = ulps * f64::EPSILON * rhs.abs();
        if err > allowed {
            violations += 1;
        }
        if rhs != 0.0 {
            worst_ulps = worst_ulps.max(err / (f64::EPSILON * rhs.abs()));
        } else if lhs != 0.0 {
            worst_ulps = f64::INFINITY;
        }
        worst_zero = worst_zero.max(net.forward(&vec![0.0; d])?.abs());
    }
    ctx.record(
        "ulps",
        violations as f64,
        Rule::AtMost(0.0),
        format!("instances={n} tolerance-ulps={ulps} worst-ulps={}", fmt_f64(worst_ulps)),
    )?;
    ctx.record("zero-input", worst_zero, Rule::AtMost(0.0), format!("instances={n}"))
}

fn he_norm_samples(d: usize, reps: usize, seed: u64) -> Vec<f64> {
    let sigma = (2.0 / d as f64).sqrt();
    map_reps(reps, |r| {
        let mut rng = stream_rng(seed, r as u64);
        (0..d).map(|_| (sigma * rng.sample::<f64, _>(StandardNormal)).powi(2)).sum::<f64>().sqrt()
    })
}

/// Smallest `δ` with `P(||A|| >= sqrt(2) + δ) <= level`, by bisection on the exact tail.
pub fn exact_delta(d: usize, level: f64) -> LabResult<f64> {
    let sigma = (2.0 / d as f64).sqrt();
    let tail = |delta: f64| weight_norm_tail(d, sigma, SQRT_2 + delta);
    let (mut lo, mut hi) = (-SQRT_2, 1.0);
    while tail(hi)? > level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
    }
    Ok(hi)
}

/// Norm dimensions tested by the concentration checks.
pub fn norm_dims() -> Vec<usize> {
    let mut dims: Vec<usize> = (1..=64).collect();
    let mut d = 96;
    while d <= 4096 {
        dims.push(d);
        d = d * 3 / 2;
    }
    dims.push(4096);
    dims
}

fn norm_concentration(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let reps = ctx.size("reps", 50_000)?;
    let mut outside = 0;
    let dims = norm_dims();
    for &d in &dims {
        for sigma in [1.0, (2.0 / d as f64).sqrt()] {
            let s = weight_norm_stats(d, sigma)?;
            outside += usize::from(!(s.gautschi_lo <= s.mean && s.mean <= s.gautschi_hi));
        }
    }
    ctx.record("gautschi", outside as f64, Rule::AtMost(0.0), format!("dimensions={}", dims.len()))?;

    let m64 = weight_norm_stats(64, (2.0 / 64.0_f64).sqrt())?.mean / SQRT_2;
    ctx.record("mean-d64", m64, Rule::Within(0.996, 0.9981), "ratio=mean/sqrt2".into())?;

    for (k, d) in [1usize, 2, 8, 64, 512].into_iter().enumerate() {
        let sigma = (2.0 / d as f64).sqrt();
        let norms = he_norm_samples(d, reps, ctx.seed(k as u64));
        let mut worst = 0.0_f64;
        for s in [SQRT_2, SQRT_2 + exact_delta(d, 0.01)?, weight_norm_stats(d, sigma)?.mean] {
            let p = weight_norm_tail(d, sigma, s)?;
            let count = norms.iter().filter(|&&v| v >= s).count();
            worst = worst.max(binomial_z(count, reps, p));
        }
        ctx.record(&format!("tail-mc:d={d}"), worst, Rule::AtMost(3.0), format!("reps={reps}"))?;
    }

    let mut excess = f64::NEG_INFINITY;
    let mut order_violations = 0;
    for &d in dims.iter().filter(|&&d| d >= 3) {
        let sigma = (2.0 / d as f64).sqrt();
        for delta in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0] {
            excess = excess.max(weight_norm_tail(d, sigma, SQRT_2 + delta)? - weight_norm_tail_bound(d, delta)?);
        }
        let exact = exact_delta(d, 0.01)?;
        let lipschitz = weight_norm_stats(d, sigma)?.mean + lipschitz_deviation(d, 0.01)? - SQRT_2;
        order_violations += usize::from(exact > lipschitz);
    }
    ctx.record("tail-bound", excess, Rule::AtMost(0.0), "measure=max(exact-bound)".into())?;
    ctx.record("lipschitz-order", order_violations as f64, Rule::AtMost(0.0), String::new())
}

fn psi(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let samples = ctx.size("samples", 10_000_000)?;
    let b = 0.1;
    let at_zero = psi_output_size(0.0, b)?;
    ctx.record("u=0", (at_zero - b * b).abs(), Rule::AtMost(0.0), format!("value={}", fmt_f64(at_zero)))?;
    let reference = psi_output_size(1.0, b)?.sqrt() - 1.0;
    ctx.record("reference", reference, Rule::Within(0.057323 - 5e-6, 0.057323 + 5e-6), String::new())?;

    let d = 2;
    let sigma = (2.0 / d as f64).sqrt();
    let chunks = 16;
    let mut worst = 0.0_f64;
    let mut label = 0;
    for u in [0.25, 0.5, 1.0] {
        for b in [0.0, 0.1, 1.0] {
            let x = vec![u; d];
            let seed = ctx.seed(label);
            label += 1;
            let sums = map_reps(chunks, |c| {
                let mut rng = stream_rng(seed, c as u64);
                let count = samples / chunks + usize::from(c < samples % chunks);
                let mut acc = 0.0;
                for _ in 0..count {
                    let y: f64 = x.iter().map(|xi| sigma * rng.sample::<f64, _>(StandardNormal) * xi).sum::<f64>() + b;
                    acc += y.max(0.0).powi(2);
                }
                acc
            });
            let mc = sums.iter().sum::<f64>() / samples as f64;
            let exact = psi_output_size(u, b)?;
            worst = worst.max((mc - exact).abs() / exact);
        }
    }
    ctx.record("mc", worst, Rule::AtMost(0.01), format!("samples={samples} measure=max-relative-error"))
}

/// Bin index of a unit vector on the sphere in `d = 2, 3` with equal-area bins.
fn sphere_bin(v: &[f64], angular: usize, bands: usize) -> usize {
    let theta = v[1].atan2(v[0]);
    let a = (((theta + PI) / (2.0 * PI)) * angular as f64) as usize % angular;
    if v.len() == 2 {
        return a;
    }
    let z = v[2].clamp(-1.0, 1.0);
    let band = (((z + 1.0) / 2.0) * bands as f64).min(bands as f64 - 1.0) as usize;
    band * angular + a
}

fn directions(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let n = ctx.size("samples", 1_000_000)?;
    for (d, angular, bands) in [(2usize, 36usize, 1usize), (3, 12, 6)] {
        let bins = angular * bands;
        let mut counts = vec![0u64; bins];
        let mut rng = stream_rng(ctx.seed(d as u64), 0);
        for _ in 0..n {
            let a = WeightScheme::HeNormal.draw_row(d, 1, &mut rng);
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let v: Vec<f64> = a.iter().map(|x| x / norm).collect();
            counts[sphere_bin(&v, angular, bands)] += 1;
        }
        let total: u64 = counts.iter().sum();
        let expected = vec![total as f64 / bins as f64; bins];
        let (stat, p) = chi_square(&counts, &expected)?;
        ctx.record(&format!("he-uniform:d={d}"), p, Rule::Above(0.01), format!("chi2={} bins={bins}", fmt_f64(stat)))?;
    }

    let xi = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let peak = direction_density_uniform_weights(&xi)?;
    ctx.record("uniform-peak", (peak - 0.25).abs(), Rule::AtMost(1e-15), format!("value={}", fmt_f64(peak)))?;

    let draws = ctx.size("uniform_samples", 4_000_000)?;
    let width = ctx.param("bin_width", 0.004)?;
    let centres = [PI / 4.0, 3.0 * PI / 4.0, -PI / 4.0, -3.0 * PI / 4.0];
    let mut rng = stream_rng(ctx.seed(10), 0);
    let mut hits = 0usize;
    for _ in 0..draws {
        let a = WeightScheme::UniformAlpha(1.0).draw_row(2, 1, &mut rng);
        let theta = a[1].atan2(a[0]);
        hits += usize::from(centres.iter().any(|c| (theta - c).abs() < 0.5 * width));
    }
    // Bin average of the analytic density by the midpoint rule.
    let steps = 1000;
    let avg = (0..steps)
        .map(|k| {
            let t = PI / 4.0 - 0.5 * width + (k as f64 + 0.5) * width / steps as f64;
            direction_density_uniform_weights(&[t.cos(), t.sin()])
        })
        .sum::<Result<f64, _>>()?
        / steps as f64;
    let trials = draws * centres.len();
    let p_bin = hits as f64 / trials as f64;
    let estimate = p_bin / width;
    let se = (p_bin * (1.0 - p_bin) / trials as f64).sqrt() / width;
    ctx.record(
        "uniform-mc",
        (estimate - avg).abs() / se,
        Rule::AtMost(3.0),
        format!("estimate={} bin-average={} se={}", fmt_f64(estimate), fmt_f64(avg), fmt_f64(se)),
    )
}

fn dead_count_law(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let inits = ctx.size("inits", 1000)?;
    let m = ctx.size("width", 16)?;
    let xs = toy_inputs(ctx.size("samples", 256)?, ctx.seed(0));
    let data = DataSet::from_1d(&xs)?;
    let seed = ctx.seed(1);
    let counts = map_reps(inits, |r| {
        toy_network(ToyInit::HeZero, m, &data, derive_seed(seed, r as u64)).and_then(|p| dead_count(&p, &data, 0.0))
    })
    .into_iter()
    .collect::<LabResult<Vec<usize>>>()?;
    let mean = counts.iter().sum::<usize>() as f64 / inits as f64;
    let expected = 0.5 * m as f64;
    let sd = (m as f64 * 0.25 / inits as f64).sqrt();
    ctx.record(
        "mean",
        (mean - expected).abs() / sd,
        Rule::AtMost(3.0),
        format!("mean={} expected={} sd-of-mean={}", fmt_f64(mean), fmt_f64(expected), fmt_f64(sd)),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn toy_training(ctx: &mut Ctx<'_>) -> LabResult<()> {
    let reps = ctx.size("seeds", 10)?;
    let settings = ToySettings {
        width: ctx.size("width", 1024)?,
        samples: ctx.size("samples", 256)?,
        epochs: ctx.size("epochs", 250)?,
        lr: ctx.param("lr", 1e-3)?,
        batch_size: ctx.size("batch_size", 128)?,
        snapshots: Vec::new(),
    };
    let seed = ctx.seed(0);
    let mut medians = Vec::new();
    let mut residual = 0.0_f64;
    for init in [ToyInit::HeZero, ToyInit::KnotUniform] {
        let runs = map_reps(reps, |r| run_toy(Target::Sine, init, &settings, derive_seed(seed, r as u64)))
            .into_iter()
            .collect::<LabResult<Vec<_>>>()?;
        if init == ToyInit::HeZero {
            residual = runs.iter().map(|r| r.init_linear_residual).fold(0.0, f64::max);
        }
        medians.push(median(runs.iter().map(|r| r.final_rmse).collect()));
    }
    ctx.record(
        "rmse-ratio",
        medians[1] / medians[0],
        Rule::Below(0.5),
        format!("median-he-zero={} median-knot-uniform={}", fmt_f64(medians[0]), fmt_f64(medians[1])),
    )?;
    ctx.record("he-zero-affine-at-init", residual, Rule::Below(1e-9), format!("seeds={reps}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Config {
        Config::parse(
            "ratio_cdf_mc.samples = 20000\nstate_probs_mc.neurons = 5000\nbias_sign.neurons = 5000\n\
             zero_bias_orthant.neurons = 5000\ngradients.instances = 50\npositive_homogeneity.instances = 100\n\
             norm_concentration.reps = 2000\npsi.samples = 100000\ndirections.samples = 20000\n\
             directions.uniform_samples = 100000\ndead_count.inits = 50\ntoy_training.seeds = 1\n\
             toy_training.width = 8\ntoy_training.epochs = 2\n",
        )
        .unwrap()
    }

    #[test]
    fn rules() {
        assert!(Rule::AtMost(1.0).holds(1.0));
        assert!(!Rule::Below(1.0).holds(1.0));
        assert!(Rule::Within(0.0, 1.0).holds(0.5));
        assert!(!Rule::Above(0.01).holds(f64::NAN));
    }

    #[test]
    fn binomial_z_edge_cases() {
        assert_eq!(binomial_z(0, 10, 0.0), 0.0);
        assert_eq!(binomial_z(1, 10, 0.0), f64::INFINITY);
        assert!((binomial_z(60, 100, 0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn selection_and_unknown_names() {
        let mut cfg = Config::default();
        cfg.set("checks", "psi, directions");
        cfg.set("skip", "directions");
        let names: Vec<_> = selected(&cfg).unwrap().iter().map(|c| c.name).collect();
        assert_eq!(names, ["psi"]);
        cfg.set("skip", "nope");
        assert!(selected(&cfg).is_err());
    }

    #[test]
    fn reduced_suite_is_deterministic() {
        let mut cfg = small();
        cfg.set("skip", "toy_training");
        let a = run_suite(&cfg).unwrap().render();
        let b = run_suite(&cfg).unwrap().render();
        assert_eq!(a, b);
        assert!(a.lines().count() > 20);
    }

    #[test]
    fn tightened_threshold_fails_named_check() {
        let mut cfg = small();
        cfg.set("checks", "ratio_cdf_mc");
        cfg.set("ratio_cdf_mc.threshold", "1e-6");
        let report = run_suite(&cfg).unwrap();
        assert!(!report.all_passed());
        assert!(report.render().lines().any(|l| l.starts_with("FAIL ratio_cdf_mc[")));
    }

    #[test]
    fn exact_delta_meets_level() {
        for d in [1, 10, 100] {
            let delta = exact_delta(d, 0.01).unwrap();
            let sigma = (2.0 / d as f64).sqrt();
            let p = weight_norm_tail(d, sigma, SQRT_2 + delta).unwrap();
            assert!(p <= 0.01 && p > 0.0099, "d={d} p={p}");
        }
    }
}
