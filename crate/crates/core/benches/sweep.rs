use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use reinfect::integrator::IntegrationConfig;
use reinfect::model::{ModelField, SystemKind};
use reinfect::sweep::{
    equilibrium_sweep, equilibrium_sweep_sequential, simulate_ensemble, simulate_ensemble_sequential, Scenario,
};
use reinfect::{ModelParams, TimeUnit};

fn param_grid(n: usize) -> Vec<ModelParams> {
    (0..n)
        .map(|k| {
            let r0 = 1.1 + 8.0 * k as f64 / n as f64;
            let nu = 0.5 * (k % 5) as f64;
            let beta = ModelParams::beta_for_r0(r0, 52.0, 26.0, nu, 0.5).unwrap();
            ModelParams::new(beta, 52.0, 26.0, 1.0, nu, 0.5, 0.5, TimeUnit::PerYear).unwrap()
        })
        .collect()
}

fn ensemble(n: usize) -> Vec<Scenario> {
    param_grid(n)
        .into_iter()
        .map(|p| Scenario {
            field: ModelField::new(p, SystemKind::NormalizedMicro { n: 10 }),
            x0: {
                let mut x = vec![0.0; SystemKind::NormalizedMicro { n: 10 }.dim()];
                x[0] = 0.999;
                x[2] = 0.001;
                x[4] = 0.999;
                x[6] = 0.001;
                x
            },
            config: IntegrationConfig::adaptive(0.0, 5.0, 0.1),
        })
        .collect()
}

fn bench_equilibrium(c: &mut Criterion) {
    let mut g = c.benchmark_group("equilibrium_sweep");
    for n in [256, 4096] {
        let grid = param_grid(n);
        g.bench_with_input(BenchmarkId::new("parallel", n), &grid, |b, grid| {
            b.iter(|| equilibrium_sweep(black_box(grid)))
        });
        g.bench_with_input(BenchmarkId::new("sequential", n), &grid, |b, grid| {
            b.iter(|| equilibrium_sweep_sequential(black_box(grid)))
        });
    }
    g.finish();
}

fn bench_ensemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_ensemble");
    g.sample_size(10);
    let scenarios = ensemble(32);
    g.bench_function("parallel", |b| b.iter(|| simulate_ensemble(black_box(&scenarios))));
    g.bench_function("sequential", |b| b.iter(|| simulate_ensemble_sequential(black_box(&scenarios))));
    g.finish();
}

criterion_group!(benches, bench_equilibrium, bench_ensemble);
criterion_main!(benches);
