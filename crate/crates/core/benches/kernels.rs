use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rvp_core::dynamics::{plummer_at_ratio, FieldMode, SimulationState, DEFAULT_CUT};
use rvp_core::par::Execution;
use rvp_core::phase_space::{project_spatial_density_with, PhaseDensity, RadialGrid, ESCAPE_TOLERANCE};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn step(c: &mut Criterion) {
    let data = plummer_at_ratio(0.5, 0.5, DEFAULT_CUT, 10_000, 1).unwrap();
    let mut group = c.benchmark_group("kdk_step_10k");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            let mut state = SimulationState::new(&data.ensemble, FieldMode::SelfConsistent, exec).unwrap();
            b.iter(|| {
                state.step(black_box(1e-3)).unwrap();
                black_box(state.scan(1e-2))
            })
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let data = plummer_at_ratio(0.5, 0.5, DEFAULT_CUT, 1_000, 1).unwrap();
    let f = PhaseDensity::from(data.density);
    let grid = RadialGrid::geometric(1e-3, 1e3, 512).unwrap();
    let mut group = c.benchmark_group("projection_512");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| project_spatial_density_with(black_box(&f), &grid, ESCAPE_TOLERANCE, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = step, projection
);
criterion_main!(benches);
