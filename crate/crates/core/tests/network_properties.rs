//! Gradients, training and initialization of networks.

use proptest::prelude::*;
use reluinit::geometry::{is_dead, DataSet};
use reluinit::initstrat::{init_layer, init_layer_with_anchors, init_network, BiasScheme, InitConfig, NetworkPlan, WeightScheme};
use reluinit::netcore::{
    backprop, empirical_risk, grad_1d_closed_form, train, LabeledData, Loss, MlpParams, Partial0, TrainConfig,
};

fn shallow_instance() -> impl Strategy<Value = (MlpParams, LabeledData, Loss, f64)> {
    (1usize..6, 1usize..20).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(-2.0..2.0f64, m),
            prop::collection::vec(-2.0..2.0f64, m),
            prop::collection::vec(-2.0..2.0f64, m),
            -1.0..1.0f64,
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n),
            any::<bool>(),
            0.0..=1.0f64,
        )
            .prop_map(|(a, b, w, c, xs, ys, logistic, d0)| {
                let loss = if logistic { Loss::Logistic } else { Loss::LeastSquares };
                let labels = if logistic { ys.iter().map(|y| y.signum()).collect() } else { ys };
                let data = LabeledData::new(DataSet::from_1d(&xs).unwrap(), labels).unwrap();
                (MlpParams::shallow_1d(a, b, w, c).unwrap(), data, loss, d0)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_gradient_equals_backprop((params, data, loss, d0) in shallow_instance()) {
        let p0 = Partial0::new(d0).unwrap();
        let cf = grad_1d_closed_form(&params, &data, loss, p0).unwrap();
        let bp = backprop(&params, &data, loss, p0).unwrap();
        let layer = &bp.hidden[0];
        let pairs = cf.a.iter().zip(&layer.weights)
            .chain(cf.b.iter().zip(&layer.biases))
            .chain(cf.w.iter().zip(&bp.output_weights))
            .chain(std::iter::once((&cf.c, &bp.output_bias)));
        for (x, y) in pairs {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn flat_parameters_roundtrip(widths in prop::collection::vec(1usize..5, 1..4), d in 1usize..4, seed in any::<u64>()) {
        let plan = NetworkPlan::uniform(d, &widths, InitConfig::default());
        let params = init_network(&plan, None, seed).unwrap();
        let mut copy = MlpParams::zeros(d, &widths).unwrap();
        copy.set_flat(&params.to_flat()).unwrap();
        prop_assert_eq!(copy, params);
    }

    #[test]
    fn zero_bias_networks_are_nearly_homogeneous(
        widths in prop::collection::vec(1usize..6, 1..5),
        x in prop::collection::vec(-2.0..2.0f64, 3),
        alpha in 0.01..100.0f64,
        seed in any::<u64>(),
    ) {
        let params = init_network(&NetworkPlan::uniform(3, &widths, InitConfig::default()), None, seed).unwrap();
        let fx = params.forward(&x).unwrap();
        let ax: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let scale: f64 = alpha * (1.0 + fx.abs()) * 1e-12;
        prop_assert!((params.forward(&ax).unwrap() - alpha * fx).abs() <= scale);
        prop_assert_eq!(params.forward(&[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn layers_draw_each_neuron_from_its_own_stream(seed in any::<u64>(), bias in prop_oneof![
        Just(BiasScheme::Zero), Just(BiasScheme::NormalSigma(0.5)), Just(BiasScheme::UniformRange(-1.0, 2.0))
    ]) {
        let cfg = InitConfig { weight: WeightScheme::HeNormal, bias, ..Default::default() };
        let small = init_layer(&cfg, 3, 4, None, seed).unwrap();
        let large = init_layer(&cfg, 3, 9, None, seed).unwrap();
        for i in 0..4 {
            prop_assert_eq!(small.neuron(i), large.neuron(i));
        }
    }

    #[test]
    fn knot_uniform_knots_stay_in_range(xs in prop::collection::vec(-5.0..5.0f64, 2..30), seed in any::<u64>()) {
        let data = DataSet::from_1d(&xs).unwrap();
        let cfg = InitConfig { bias: BiasScheme::KnotUniform1D, ..Default::default() };
        let layer = init_layer(&cfg, 1, 16, Some(&data), seed).unwrap();
        let (lo, hi) = data.coordinate_range(0);
        for i in 0..16 {
            let knot = layer.neuron(i).knot().unwrap();
            prop_assert!(lo - 1e-12 <= knot && knot <= hi + 1e-12);
        }
    }

    #[test]
    fn hull_anchors_lie_on_edges(rows in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3..20), seed in any::<u64>()) {
        let data = DataSet::from_rows(&rows.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>()).unwrap();
        let cfg = InitConfig { weight: WeightScheme::Sphere, bias: BiasScheme::HullRandom(4), ..Default::default() };
        let (layer, anchors) = init_layer_with_anchors(&cfg, 2, 6, Some(&data), seed).unwrap();
        for (i, anchor) in anchors.iter().enumerate() {
            let x = anchor.as_ref().expect("hull anchor");
            prop_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(layer.neuron(i).pre_activation(x).abs() < 1e-12);
        }
    }

    #[test]
    fn init_config_roundtrips(sigma in 0.01..5.0f64, lo in -2.0..0.0f64, n in 1usize..10, d0 in 0.0..=1.0f64, seed in any::<u64>()) {
        let weights = [WeightScheme::HeNormal, WeightScheme::HeUniform, WeightScheme::XavierUniform,
            WeightScheme::NormalSigma(sigma), WeightScheme::UniformAlpha(sigma), WeightScheme::Sphere, WeightScheme::Ball];
        let biases = [BiasScheme::Zero, BiasScheme::Const(lo), BiasScheme::NormalSigma(sigma),
            BiasScheme::UniformRange(lo, lo + sigma), BiasScheme::KnotUniform1D, BiasScheme::HullFixed(n), BiasScheme::HullRandom(n)];
        for (weight, bias) in weights.into_iter().zip(biases) {
            let cfg = InitConfig { weight, bias, partial0: Partial0::new(d0).unwrap(), seed };
            prop_assert_eq!(InitConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
        }
    }
}

fn finite_difference_gradient(params: &MlpParams, data: &LabeledData, loss: Loss) -> Vec<f64> {
    let base = params.to_flat();
    let mut probe = params.clone();
    let h = 1e-6;
    (0..base.len())
        .map(|k| {
            let mut v = base.clone();
            v[k] += h;
            probe.set_flat(&v).unwrap();
            let up = empirical_risk(&probe, data, loss).unwrap();
            v[k] -= 2.0 * h;
            probe.set_flat(&v).unwrap();
            (up - empirical_risk(&probe, data, loss).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn backprop_matches_finite_differences_on_deep_networks() {
    let rows: Vec<Vec<f64>> = (0..12).map(|j| vec![(j as f64 * 0.37).sin(), (j as f64 * 0.91).cos()]).collect();
    let data = LabeledData::new(DataSet::from_rows(&rows).unwrap(), (0..12).map(|j| (j as f64 * 0.5).sin()).collect()).unwrap();
    let cfg = InitConfig { bias: BiasScheme::NormalSigma(0.3), ..Default::default() };
    let mut checked = 0;
    for seed in 0..20 {
        let params = init_network(&NetworkPlan::uniform(2, &[5, 4, 3], cfg), None, seed).unwrap();
        let min_pre = (0..3)
            .flat_map(|l| {
                let inputs = if l == 0 { data.inputs.clone() } else { params.layer_outputs(&data.inputs, l - 1).unwrap() };
                let layer = &params.hidden[l];
                inputs.points().flat_map(|x| (0..layer.fan_out()).map(|i| layer.neuron(i).pre_activation(x).abs()).collect::<Vec<_>>()).collect::<Vec<_>>()
            })
            .fold(f64::INFINITY, f64::min);
        if min_pre < 1e-3 {
            continue;
        }
        checked += 1;
        for loss in [Loss::LeastSquares, Loss::Logistic] {
            let g = backprop(&params, &data, loss, Partial0::default()).unwrap().to_flat();
            let fd = finite_difference_gradient(&params, &data, loss);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() / a.abs().max(1.0) < 1e-6, "seed {seed}: {a} vs {b}");
            }
        }
    }
    assert!(checked > 5);
}

#[test]
fn dead_neurons_stay_frozen_during_training() {
    let xs: Vec<f64> = (0..40).map(|j| j as f64 / 39.0).collect();
    let data = LabeledData::from_fn_1d(&xs, |t| (6.0 * t).sin()).unwrap();
    // Neurons 0 and 1 are inactive on [0, 1]; neuron 1 has its edge exactly at the sample 0.
    let params = MlpParams::shallow_1d(vec![-1.0, -2.0, 1.0, 0.5], vec![-0.5, 0.0, -0.3, 0.1], vec![0.7, -0.4, 1.2, 0.9], 0.1).unwrap();
    for i in 0..2 {
        assert!(is_dead(&data.inputs, &params.hidden[0].neuron(i), 0.0).unwrap());
    }
    let cfg = TrainConfig { batch_size: 8, epochs: 20, lr: 1e-2, ..Default::default() };
    let outcome = train(&params, &data, &cfg).unwrap();
    let (before, after) = (&params.hidden[0], &outcome.params.hidden[0]);
    for i in 0..2 {
        assert_eq!(after.weights[i], before.weights[i]);
        assert_eq!(after.biases[i], before.biases[i]);
        assert_eq!(outcome.params.output_weights[i], params.output_weights[i]);
    }
    assert_ne!(after.weights[2], before.weights[2]);
    assert!(outcome.history.last().unwrap() < &empirical_risk(&params, &data, Loss::LeastSquares).unwrap());
}

#[test]
fn partial0_revives_edge_neurons() {
    let xs: Vec<f64> = (0..40).map(|j| j as f64 / 39.0).collect();
    let data = LabeledData::from_fn_1d(&xs, |t| 1.0 + t).unwrap();
    let params = MlpParams::shallow_1d(vec![-2.0], vec![0.0], vec![0.7], 0.0).unwrap();
    assert!(!is_dead(&data.inputs, &params.hidden[0].neuron(0), 1.0).unwrap());
    let g = backprop(&params, &data, Loss::LeastSquares, Partial0::new(1.0).unwrap()).unwrap();
    assert_ne!(g.hidden[0].biases[0], 0.0);
}
