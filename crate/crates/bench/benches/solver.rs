use bidopt::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn dual_and_recovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for (items, contracts) in [(100, 20), (400, 80), (1200, 200)] {
        let inst = generate::sparse_exponential(items, contracts, 42);
        group.bench_with_input(BenchmarkId::new("dual", format!("{items}x{contracts}")), &inst, |b, inst| {
            b.iter(|| solve_dual(inst, &SolverOptions::default()).unwrap())
        });
        let dual = solve_dual(&inst, &SolverOptions::default()).unwrap();
        group.bench_with_input(BenchmarkId::new("recover", format!("{items}x{contracts}")), &inst, |b, inst| {
            b.iter(|| recover_primal(inst, &dual, None).unwrap())
        });
    }
    group.finish();
}

fn feasibility(c: &mut Criterion) {
    let inst = generate::sparse_exponential(400, 80, 7);
    c.bench_function("feasibility_lp/400x80", |b| b.iter(|| inst.check_adequate_supply(1e-6).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let inst = generate::small_mixed(20, 5, 3);
    let dual = solve_dual(&inst, &SolverOptions::default()).unwrap();
    let primal = recover_primal(&inst, &dual, None).unwrap();
    let policy = BidPolicy::from_solution(&inst, &primal);
    let config = SimulationConfig { horizon: 1000.0, replications: 8, seed: 1, ..Default::default() };
    c.bench_function("simulate/1000x8", |b| b.iter(|| simulate(&inst, &policy, &config).unwrap()));
}

criterion_group!(benches, dual_and_recovery, feasibility, simulation);
criterion_main!(benches);
