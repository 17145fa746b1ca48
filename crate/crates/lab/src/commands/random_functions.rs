//! Randomly initialized networks evaluated on grids.
//!
//! Strategies: `he-zero` (He-normal weights, zero biases), `he-const`
//! (He-normal weights, constant bias `const_bias`) and `hull` (unit-sphere
//! weights, biases from `hull_bias` on `samples` data points uniform on the
//! unit interval or square). The `table` key selects the output:
//!
//! - `curves` (default): `strategy, function, x, y` for scalar networks of width `width_1d` on `[0, 1]`.
//! - `surfaces`: `strategy, function, x1, x2, y` for networks of width `width_2d` on `[0, 1]²`.
//! - `edges`: `strategy, function, neuron, a1, a2, b, distance, anchor_x1, anchor_x2`
//!   for the hidden neurons of the two-dimensional networks; the anchor is the
//!   hull point on the edge (`nan` for other strategies).
//!
//! Keys: `strategies`, `functions`, `grid`, `width_1d`, `width_2d`,
//! `const_bias`, `hull_bias`, `samples`, `seed`.

use rand::Rng;

use reluinit::geometry::DataSet;
use reluinit::initstrat::{edge_distance, init_layer_with_anchors, BiasScheme, InitConfig, WeightScheme};
use reluinit::netcore::MlpParams;
use reluinit::rng::{derive_seed, stream_rng};

use super::table_kind;
use crate::config::Config;
use crate::csv::Table;
use crate::error::{LabError, LabResult};
use crate::row;

/// Random network with its hidden anchors.
struct RandomNet {
    params: MlpParams,
    anchors: Vec<Option<Vec<f64>>>,
}

fn strategy_config(name: &str, cfg: &Config) -> LabResult<InitConfig> {
    Ok(match name {
        "he-zero" => InitConfig::default(),
        "he-const" => InitConfig { bias: BiasScheme::Const(cfg.value("const_bias", 0.1)?), ..Default::default() },
        "hull" => InitConfig {
            weight: WeightScheme::Sphere,
            bias: cfg.get("hull_bias").unwrap_or("hull:5").parse()?,
            ..Default::default()
        },
        other => return Err(LabError::Config(format!("unknown strategy '{other}'"))),
    })
}

fn unit_data(d: usize, n: usize, seed: u64) -> LabResult<DataSet> {
    let mut rng = stream_rng(seed, 0);
    Ok(DataSet::from_flat(n, d, (0..n * d).map(|_| rng.random::<f64>()).collect())?)
}

fn random_net(init: &InitConfig, d: usize, width: usize, data: &DataSet, seed: u64) -> LabResult<RandomNet> {
    let inputs = init.bias.is_data_dependent().then_some(data);
    let (layer, anchors) = init_layer_with_anchors(init, d, width, inputs, derive_seed(seed, 0))?;
    let mut rng = stream_rng(derive_seed(seed, 1), 0);
    let w = WeightScheme::HeNormal.draw_row(width, 1, &mut rng);
    Ok(RandomNet { params: MlpParams::new(vec![layer], w, 0.0)?, anchors })
}

pub fn run(cfg: &Config) -> LabResult<Table> {
    let kind = table_kind(cfg, &["curves", "surfaces", "edges"])?;
    let strategies = cfg.names("strategies", &["he-zero", "he-const", "hull"]);
    let functions: usize = cfg.value("functions", 10)?;
    let samples: usize = cfg.value("samples", 256)?;
    let d = if kind == "curves" { 1 } else { 2 };
    let width: usize = if d == 1 { cfg.value("width_1d", 128)? } else { cfg.value("width_2d", 20)? };
    let grid: usize = cfg.value("grid", if d == 1 { 201 } else { 41 })?;
    if grid < 2 || width == 0 || samples == 0 {
        return Err(LabError::Config("need grid >= 2, positive width and samples".into()));
    }
    let seed = cfg.seed()?;
    let data = unit_data(d, samples, derive_seed(seed, u64::MAX))?;
    let ticks: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();

    let mut table = match kind {
        "curves" => Table::new("random-functions-curves", &["strategy", "function", "x", "y"]),
        "surfaces" => Table::new("random-functions-surfaces", &["strategy", "function", "x1", "x2", "y"]),
        _ => Table::new(
            "random-functions-edges",
            &["strategy", "function", "neuron", "a1", "a2", "b", "distance", "anchor_x1", "anchor_x2"],
        ),
    };
    for (si, name) in strategies.iter().enumerate() {
        let init = strategy_config(name, cfg)?;
        for f in 0..functions {
            let net = random_net(&init, d, width, &data, derive_seed(derive_seed(seed, si as u64), f as u64))?;
            match kind {
                "curves" => {
                    for &x in &ticks {
                        table.push(row![name.as_str(), f, x, net.params.forward(&[x])?]);
                    }
                }
                "surfaces" => {
                    for &x2 in &ticks {
                        for &x1 in &ticks {
                            table.push(row![name.as_str(), f, x1, x2, net.params.forward(&[x1, x2])?]);
                        }
                    }
                }
                _ => {
                    let layer = &net.params.hidden[0];
                    for i in 0..layer.fan_out() {
                        let neuron = layer.neuron(i);
                        let distance = edge_distance(&neuron).unwrap_or(f64::NAN);
                        let anchor = net.anchors[i].clone().unwrap_or_else(|| vec![f64::NAN; 2]);
                        table.push(row![
                            name.as_str(),
                            f,
                            i,
                            neuron.a[0],
                            neuron.a[1],
                            neuron.b,
                            distance,
                            anchor[0],
                            anchor[1]
                        ]);
                    }
                }
            }
        }
    }
    Ok(table)
}
