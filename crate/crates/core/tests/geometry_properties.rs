//! Neuron states, convex-hull sampling and cone membership.

use proptest::prelude::*;
use reluinit::geometry::{
    behaves_linearly, classify, classify_1d, dual_cone_contains, edge_hits_ico, ico_edge_witness, sample_ico_seeded,
    DataSet, Neuron, NeuronState,
};
use reluinit::initstrat::{init_layer, BiasScheme, InitConfig, WeightScheme};

fn points(d: usize, n: usize) -> impl Strategy<Value = DataSet> {
    prop::collection::vec(-3.0..3.0f64, n * d).prop_map(move |v| DataSet::from_flat(n, d, v).unwrap())
}

fn neuron(d: usize) -> impl Strategy<Value = Neuron> {
    (prop::collection::vec(-2.0..2.0f64, d), -2.0..2.0f64)
        .prop_filter("non-constant", |(a, _)| a.iter().any(|v| *v != 0.0))
        .prop_map(|(a, b)| Neuron::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn knot_rule_agrees_with_sign_rule(
        xs in prop::collection::vec(-32i32..=32, 1..12),
        k in prop_oneof![-16i32..=-1, 1i32..=16],
        m in -128i32..=128,
    ) {
        // Dyadic data and weights keep pre-activations exact.
        let data = DataSet::from_1d(&xs.iter().map(|&x| x as f64 / 16.0).collect::<Vec<_>>()).unwrap();
        let nrn = Neuron::new(vec![k as f64 / 8.0], m as f64 / 64.0);
        prop_assert_eq!(classify_1d(&data, &nrn).unwrap(), classify(&data, &nrn).unwrap());
    }

    #[test]
    fn hull_samples_are_interior(data in points(3, 5), seed in any::<u64>()) {
        let x = sample_ico_seeded(&data, seed);
        for k in 0..3 {
            let (lo, hi) = data.coordinate_range(k);
            prop_assert!(lo - 1e-12 <= x[k] && x[k] <= hi + 1e-12);
        }
    }

    #[test]
    fn hull_biases_make_every_neuron_fully_active(data in points(2, 12), n in 2usize..6, seed in any::<u64>()) {
        let cfg = InitConfig { weight: WeightScheme::Sphere, bias: BiasScheme::HullFixed(n), ..Default::default() };
        let layer = init_layer(&cfg, 2, 8, Some(&data), seed).unwrap();
        for i in 0..8 {
            prop_assert_eq!(classify(&data, &layer.neuron(i)).unwrap(), NeuronState::FullyActive);
        }
    }

    #[test]
    fn ico_witness_matches_edge_test(data in points(2, 4), nrn in neuron(2)) {
        let hits = edge_hits_ico(&data, &nrn).unwrap();
        let witness = ico_edge_witness(&data, &nrn).unwrap();
        prop_assert_eq!(hits, witness.is_some());
        if let Some(w) = witness {
            prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.weights.iter().all(|&v| v > 0.0));
            prop_assert!(nrn.pre_activation(&w.point).abs() < 1e-9);
        }
    }

    #[test]
    fn fully_active_iff_edge_meets_ico(data in points(2, 5), nrn in neuron(2)) {
        let state = classify(&data, &nrn).unwrap();
        let hits = edge_hits_ico(&data, &nrn).unwrap();
        prop_assert_eq!(state == NeuronState::FullyActive, hits);
    }

    #[test]
    fn orthant_directions_lie_in_the_dual_cone(
        data in prop::collection::vec(0.0..3.0f64, 3 * 6).prop_map(|v| DataSet::from_flat(6, 3, v).unwrap()),
        y in prop::collection::vec(0.0..3.0f64, 3),
    ) {
        prop_assert!(dual_cone_contains(&data, &y).unwrap());
        let neg: Vec<f64> = y.iter().map(|v| -v - 0.1).collect();
        prop_assert!(!dual_cone_contains(&data, &neg).unwrap() || data.points().all(|x| x.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn non_fully_active_neurons_are_affine(data in points(2, 6), nrn in neuron(2)) {
        if classify(&data, &nrn).unwrap() != NeuronState::FullyActive {
            let (v, c) = behaves_linearly(&data, &nrn).unwrap().expect("affine on data");
            for x in data.points() {
                let affine = v[0] * x[0] + v[1] * x[1] + c;
                prop_assert!((affine - nrn.output(x)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn kinked_neuron_on_a_grid_is_not_affine() {
    let rows: Vec<Vec<f64>> = (0..5).flat_map(|i| (0..5).map(move |j| vec![i as f64, j as f64])).collect();
    let data = DataSet::from_rows(&rows).unwrap();
    let nrn = Neuron::new(vec![1.0, 1.0], -4.0);
    assert_eq!(classify(&data, &nrn).unwrap(), NeuronState::FullyActive);
    assert_eq!(behaves_linearly(&data, &nrn).unwrap(), None);
}
