//! End-to-end tests of the `reluinit` binary.

use std::f64::consts::SQRT_2;
use std::path::PathBuf;
use std::process::{Command, Output};

fn reluinit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reluinit")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = reluinit(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Header and rows of a CSV output, skipping the schema line.
fn parse(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("missing column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("reluinit-cli-{}-{name}", std::process::id()))
}

#[test]
fn commands_are_reproducible() {
    let runs: [&[&str]; 6] = [
        &["states-sweep", "--set", "rho=0.5,2", "--set", "neurons=500"],
        &["knot-density", "--set", "points=21"],
        &["norm-conc", "--set", "dims=2,8", "--set", "reps=500"],
        &["train-1d", "--set", "widths=4", "--set", "seeds=2", "--set", "epochs=3", "--set", "samples=16"],
        &["random-functions", "--set", "table=edges", "--set", "functions=2"],
        &["validate", "--set", "checks=split_identity,psi", "--set", "psi.samples=1000"],
    ];
    for args in runs {
        let a = reluinit(&[args, &["--seed", "11"]].concat());
        let b = reluinit(&[args, &["--seed", "11"]].concat());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn config_file_and_out_path() {
    let cfg = temp_path("cfg.ini");
    let out = temp_path("out.csv");
    std::fs::write(&cfg, "# sweep\nseed = 4\nstrategies = zero-bias, dirac-normal\nrho = 14.1\nneurons = 1000\n").unwrap();
    let status = reluinit(&["states-sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema=reluinit/states-sweep/v1\n"));
    let (h, rows) = parse(&text);
    assert_eq!(rows.len(), 2);
    let zero = &rows[0];
    assert_eq!(num(&zero[col(&h, "p_sa")]), 0.5);
    assert_eq!(num(&zero[col(&h, "p_ia")]), 0.5);
    let dirac = &rows[1];
    assert!((num(&dirac[col(&h, "p_fa")]) - 0.4717).abs() < 1e-4);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    std::fs::remove_file(cfg).ok();
    std::fs::remove_file(out).ok();
}

#[test]
fn knot_densities_match_paper_shapes() {
    // Fine grid near the origin (where the uniform families jump), coarse grid for the tails.
    let wide = stdout(&["knot-density", "--set", "z_min=-2000", "--set", "z_max=2000", "--set", "points=400001"]);
    let fine = stdout(&["knot-density", "--set", "z_min=-5", "--set", "z_max=5", "--set", "points=100001"]);
    let (h, rows) = parse(&wide);
    let (_, fine_rows) = parse(&fine);
    let (s, z, pdf) = (col(&h, "strategy"), col(&h, "z"), col(&h, "pdf"));
    let curve = |rows: &[Vec<String>], strategy: &str| -> Vec<(f64, f64)> {
        rows.iter().filter(|r| r[s] == strategy).map(|r| (num(&r[z]), num(&r[pdf]))).collect()
    };
    let trapezoid = |pts: &[(f64, f64)], keep: &dyn Fn(f64, f64) -> bool| -> f64 {
        pts.windows(2).filter(|w| keep(w[0].0, w[1].0)).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
    };
    for strategy in ["dirac-normal", "dirac-uniform", "normal-normal", "uniform-asym", "uniform-sym"] {
        let inner = trapezoid(&curve(&fine_rows, strategy), &|_, _| true);
        let outer = trapezoid(&curve(&rows, strategy), &|a, b| b <= -5.0 + 1e-9 || a >= 5.0 - 1e-9);
        let area = inner + outer;
        // The Cauchy law keeps mass 2 atan(1/2000)/π beyond the grid.
        let tol = if strategy == "normal-normal" { 1e-3 + 2.0 / (std::f64::consts::PI * 2000.0) } else { 1e-3 };
        assert!((area - 1.0).abs() < tol, "{strategy}: area {area}");
    }
    // Dirac(1)/N(0, 1): zero at the origin, modes at ±1/sqrt(2).
    let dn: Vec<(f64, f64)> = rows.iter().filter(|r| r[s] == "dirac-normal").map(|r| (num(&r[z]), num(&r[pdf]))).collect();
    let at_zero = dn.iter().find(|p| p.0 == 0.0).unwrap();
    assert_eq!(at_zero.1, 0.0);
    let near: Vec<&(f64, f64)> = dn.iter().filter(|p| p.0.abs() < 3.0).collect();
    let mode = near.iter().filter(|p| p.0 > 0.0).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((mode.0 - 1.0 / SQRT_2).abs() < 0.01, "mode at {}", mode.0);
    let mode_neg = near.iter().filter(|p| p.0 < 0.0).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((mode_neg.0 + 1.0 / SQRT_2).abs() < 0.01);
}

#[test]
fn norm_thresholds_are_ordered_and_match_simulation() {
    let csv = stdout(&["norm-conc", "--set", "dims=1,3,10,64,512", "--set", "reps=50000"]);
    let (h, rows) = parse(&csv);
    for r in &rows {
        let d: usize = r[col(&h, "d")].parse().unwrap();
        let exact = num(&r[col(&h, "delta_exact")]);
        let lipschitz = num(&r[col(&h, "delta_lipschitz")]);
        if d >= 3 {
            let gamma = num(&r[col(&h, "delta_gamma_bound")]);
            assert!(exact <= gamma && gamma <= lipschitz, "d={d}");
        }
        let mc = num(&r[col(&h, "delta_mc")]);
        let se = num(&r[col(&h, "delta_mc_se")]);
        assert!((mc - exact).abs() <= 3.0 * se, "d={d}: mc {mc} exact {exact} se {se}");
    }
}

#[test]
fn norm_density_d1_is_half_normal() {
    let csv = stdout(&["norm-conc", "--set", "table=density", "--set", "dims=1", "--set", "points=41"]);
    let (h, rows) = parse(&csv);
    for r in rows {
        let x = num(&r[col(&h, "x")]);
        let sigma = SQRT_2;
        let half_normal = 2.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()) * (-x * x / (2.0 * sigma * sigma)).exp();
        assert!((num(&r[col(&h, "density")]) - half_normal).abs() < 1e-14);
    }
}

#[test]
fn random_function_edges() {
    let csv = stdout(&["random-functions", "--set", "table=edges"]);
    let (h, rows) = parse(&csv);
    let (s, b, dist) = (col(&h, "strategy"), col(&h, "b"), col(&h, "distance"));
    assert!(rows.iter().filter(|r| r[s] == "he-zero").all(|r| num(&r[b]) == 0.0));
    let mut d: Vec<f64> = rows.iter().filter(|r| r[s] == "he-const").map(|r| num(&r[dist])).collect();
    d.sort_by(f64::total_cmp);
    let median = d[d.len() / 2];
    assert!((median - 0.1 / SQRT_2).abs() < 0.02, "median distance {median}");
    for r in rows.iter().filter(|r| r[s] == "hull") {
        let (x1, x2) = (num(&r[col(&h, "anchor_x1")]), num(&r[col(&h, "anchor_x2")]));
        assert!((0.0..=1.0).contains(&x1) && (0.0..=1.0).contains(&x2));
        let (a1, a2) = (num(&r[col(&h, "a1")]), num(&r[col(&h, "a2")]));
        assert!((a1 * x1 + a2 * x2 + num(&r[b])).abs() < 1e-12);
        assert!(((a1 * a1 + a2 * a2).sqrt() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn random_function_grids() {
    let (h, rows) = parse(&stdout(&["random-functions", "--set", "functions=1", "--set", "grid=11"]));
    assert_eq!(rows.len(), 3 * 11);
    assert_eq!(h, ["strategy", "function", "x", "y"]);
    let (_, rows) = parse(&stdout(&["random-functions", "--set", "table=surfaces", "--set", "functions=1", "--set", "grid=5"]));
    assert_eq!(rows.len(), 3 * 25);
}

#[test]
fn train_tables() {
    let base = ["train-1d", "--set", "widths=16", "--set", "seeds=3", "--set", "epochs=10", "--set", "samples=32"];
    let (h, rows) = parse(&stdout(&[&base[..], &["--set", "table=summary"]].concat()));
    assert_eq!(rows.len(), 3 * 2 * 3);
    for r in rows.iter().filter(|r| r[col(&h, "init")] == "he-zero") {
        assert!(num(&r[col(&h, "init_linear_residual")]) < 1e-9);
        assert!(r[col(&h, "dead_at_init")].parse::<usize>().unwrap() <= 16);
    }
    let (_, curves) = parse(&stdout(&[&base[..], &["--set", "table=curves"]].concat()));
    assert_eq!(curves.len(), 3 * 2 * 3 * 11);
    let (h, knots) = parse(&stdout(&[&base[..], &["--set", "table=knots", "--set", "bins=10"]].concat()));
    assert_eq!(knots.len(), 3 * 2 * 10);
    let total: usize = knots
        .iter()
        .map(|r| r[col(&h, "count_pos")].parse::<usize>().unwrap() + r[col(&h, "count_neg")].parse::<usize>().unwrap())
        .sum();
    assert!(total > 0 && total <= 3 * 2 * 3 * 16);
}

#[test]
fn validate_exit_codes_and_negative_control() {
    let ok = reluinit(&["validate", "--set", "checks=split_identity,psi", "--set", "psi.samples=2000000"]);
    assert_eq!(ok.status.code(), Some(0));
    let report = String::from_utf8(ok.stdout).unwrap();
    assert!(report.lines().filter(|l| l.starts_with("PASS ")).count() >= 5);
    assert!(report.lines().all(|l| l.starts_with("PASS ") || l.starts_with("SUMMARY")));

    let bad = reluinit(&[
        "validate",
        "--set",
        "checks=ratio_cdf_mc",
        "--set",
        "ratio_cdf_mc.samples=10000",
        "--set",
        "ratio_cdf_mc.threshold=1e-6",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL ratio_cdf_mc[") && l.contains("threshold=<9.9999999999999995e-7")));
}

#[test]
fn bad_input_is_reported() {
    let out = reluinit(&["states-sweep", "--set", "strategies=nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown strategy"));
    let out = reluinit(&["validate", "--set", "skip=nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = reluinit(&["norm-conc", "--set", "table=bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
