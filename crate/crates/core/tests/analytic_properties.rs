//! Special functions, weight-norm statistics and the output-size formula.

use std::f64::consts::{PI, SQRT_2};

use proptest::prelude::*;
use reluinit::analytics::{
    psi_output_size, state_probabilities, weight_norm_density, weight_norm_stats, weight_norm_tail,
    weight_norm_tail_bound,
};
use reluinit::quadrature::integrate;
use reluinit::ratiodist::ScalarDist;
use reluinit::special::{gamma, gamma_p, gamma_q, ln_upper_incomplete_gamma, normal_cdf, normal_pdf, upper_incomplete_gamma};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn regularized_gammas_sum_to_one(a in 0.05..200.0f64, x in 0.0..400.0f64) {
        prop_assert!((gamma_p(a, x).unwrap() + gamma_q(a, x).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn upper_gamma_recurrence(a in 0.1..50.0f64, x in 0.01..80.0f64) {
        // Γ(a + 1, x) = a Γ(a, x) + x^a e^{-x}.
        let lhs = upper_incomplete_gamma(a + 1.0, x).unwrap();
        let rhs = a * upper_incomplete_gamma(a, x).unwrap() + (a * x.ln() - x).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1e-300), "{lhs} vs {rhs}");
    }

    #[test]
    fn upper_gamma_is_decreasing(a in 0.1..50.0f64, x in 0.0..50.0f64, dx in 0.001..5.0f64) {
        prop_assert!(gamma_q(a, x + dx).unwrap() <= gamma_q(a, x).unwrap());
    }

    #[test]
    fn log_upper_gamma_is_consistent(a in 0.1..30.0f64, x in 0.01..30.0f64) {
        let direct = upper_incomplete_gamma(a, x).unwrap().ln();
        prop_assert!((ln_upper_incomplete_gamma(a, x).unwrap() - direct).abs() < 1e-11 * direct.abs().max(1.0));
    }

    #[test]
    fn normal_cdf_symmetry(z in -30.0..30.0f64) {
        prop_assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gautschi_bounds_hold(d in 1usize..100_000, sigma in 0.01..10.0f64) {
        let s = weight_norm_stats(d, sigma).unwrap();
        prop_assert!(s.gautschi_lo <= s.mean && s.mean <= s.gautschi_hi, "d={d}: {s:?}");
        prop_assert!(s.mode <= s.mean + 1e-12);
    }

    #[test]
    fn tail_bound_dominates_exact_tail(d in 3usize..5000, delta in 0.001..3.0f64) {
        let exact = weight_norm_tail(d, (2.0 / d as f64).sqrt(), SQRT_2 + delta).unwrap();
        prop_assert!(exact <= weight_norm_tail_bound(d, delta).unwrap());
    }

    #[test]
    fn psi_matches_normal_partial_moment(u in 0.01..5.0f64, b in -5.0..5.0f64) {
        // E max(0, Y)² for Y ~ N(b, s²), s = sqrt(2) u.
        let s = SQRT_2 * u;
        let oracle = (b * b + s * s) * normal_cdf(b / s) + b * s * normal_pdf(b / s);
        let psi = psi_output_size(u, b).unwrap();
        // Both forms cancel for b << -u, so accuracy is relative to the size of the terms.
        prop_assert!((psi - oracle).abs() <= 1e-12 * (oracle + 1e-3 * (b * b + s * s)), "{psi} vs {oracle}");
    }

    #[test]
    fn psi_grows_with_bias(u in 0.0..3.0f64, b in -3.0..3.0f64, db in 0.001..1.0f64) {
        let slack = 1e-15 * (b * b + u * u);
        prop_assert!(psi_output_size(u, b + db).unwrap() >= psi_output_size(u, b).unwrap() - slack);
    }

    #[test]
    fn state_probabilities_sum_to_one(
        bias in prop_oneof![
            (0.1..3.0f64).prop_map(|s| ScalarDist::normal(s).unwrap()),
            (-2.0..2.0f64).prop_filter("nonzero", |b| *b != 0.0).prop_map(|b| ScalarDist::dirac(b).unwrap()),
            (-2.0..2.0f64, 0.1..2.0f64).prop_map(|(lo, w)| ScalarDist::uniform(lo, lo + w).unwrap()),
        ],
        weight in prop_oneof![
            (0.1..3.0f64).prop_map(|s| ScalarDist::normal(s).unwrap()),
            (0.1..3.0f64).prop_map(|a| ScalarDist::symmetric_uniform(a).unwrap()),
        ],
        x_min in -2.0..2.0f64,
        width in 0.01..3.0f64,
    ) {
        let p = state_probabilities(&bias, &weight, x_min, x_min + width).unwrap();
        prop_assert!((p.sum() - 1.0).abs() < 1e-9, "{p:?}");
    }
}

#[test]
fn norm_density_integrates_to_one_and_matches_tail() {
    for d in [1, 2, 3, 10, 100] {
        let sigma = (2.0 / d as f64).sqrt();
        let total = integrate(|x| weight_norm_density(d, sigma, x).unwrap(), 0.0, 20.0, 1e-12, 1e-12).value;
        assert!((total - 1.0).abs() < 1e-9, "d={d}");
        let s = 1.3;
        let tail = integrate(|x| weight_norm_density(d, sigma, x).unwrap(), s, 20.0, 1e-13, 1e-12).value;
        assert!((tail - weight_norm_tail(d, sigma, s).unwrap()).abs() < 1e-9, "d={d}");
    }
}

#[test]
fn norm_mean_is_continuous_across_evaluation_routes() {
    // Mean of the chi law with d = 199 and d = 200 from the recurrence
    // Γ(x + 3/2) / Γ(x + 1) = (x + 1/2) / x · Γ(x + 1/2) / Γ(x) with x = d / 2.
    let m199 = weight_norm_stats(199, 1.0).unwrap().mean;
    let m201 = weight_norm_stats(201, 1.0).unwrap().mean;
    let x = 99.5;
    assert!((m201 - m199 * (x + 0.5) / x).abs() < 2e-13 * m201);
    let m200 = weight_norm_stats(200, 1.0).unwrap().mean;
    let m202 = weight_norm_stats(202, 1.0).unwrap().mean;
    assert!((m202 - m200 * 100.5 / 100.0).abs() < 1e-14 * m202);
}

#[test]
fn gamma_function_values() {
    assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
    assert!((gamma(5.0) - 24.0).abs() < 1e-12);
}
