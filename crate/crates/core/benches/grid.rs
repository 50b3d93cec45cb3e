use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gkp_teleport::pushforward::{build_density, DensityOptions, OutcomeGrid};
use gkp_teleport::{Execution, ProtocolParams};

fn density_schedules(c: &mut Criterion) {
    let params = ProtocolParams::new(0.01, 0.0681 * PI).unwrap();
    let mut group = c.benchmark_group("build_density");
    group.sample_size(10);
    for n in [20_000usize, 200_000] {
        let grid = OutcomeGrid::symmetric(20.0, n).unwrap();
        for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let options = DensityOptions { execution, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, grid| {
                b.iter(|| build_density(grid, params, &options).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, density_schedules);
criterion_main!(benches);
