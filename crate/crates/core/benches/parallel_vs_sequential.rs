//! Sequential against rayon execution on the two workloads that fan out:
//! a small four-variant grid and a batch of gradient checks.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use windcast::experiment::{run_grid, DatasetSpec, GridSpec, TrainSpec};
use windcast::network::{ModelConfig, StackedModel, Window};
use windcast::numerics::SeededRng;
use windcast::optim::grad_check;
use windcast::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn small_grid() -> GridSpec {
    let datasets = ["starkville", "meridian"]
        .into_iter()
        .map(|site| DatasetSpec {
            site: site.into(),
            month: "July".into(),
            path: fixture(&format!("{site}_2022-07.csv")),
        })
        .collect();
    let train = TrainSpec {
        model: ModelConfig {
            layers: 2,
            hidden_width: 8,
            lookback: 12,
            ..ModelConfig::default()
        },
        epochs: 2,
        ..TrainSpec::default()
    };
    GridSpec::new(datasets, train)
}

fn grid(c: &mut Criterion) {
    let spec = small_grid();
    let mut group = c.benchmark_group("grid_2x4");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_grid(&spec, exec).unwrap())
        });
    }
    group.finish();
}

fn gradchecks(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..16).collect();
    let check = |&seed: &u64| {
        let cfg = ModelConfig {
            layers: 2,
            hidden_width: 4,
            lookback: 5,
            seed,
            ..ModelConfig::default()
        };
        let model = StackedModel::build(cfg.clone()).unwrap();
        let mut rng = SeededRng::new(seed);
        let w = Window {
            x: rng.uniform(cfg.lookback, cfg.input_width, 0.0, 1.0).unwrap(),
            y: rng.uniform_scalar(0.0, 1.0),
            target_row: 0,
        };
        grad_check(&model, &w, 1e-5).unwrap()
    };
    let mut group = c.benchmark_group("gradcheck_x16");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exec.map(&seeds, check))
        });
    }
    group.finish();
}

criterion_group!(benches, grid, gradchecks);
criterion_main!(benches);
