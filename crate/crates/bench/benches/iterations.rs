use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fpboost::clairvoyant::run_clairvoyant;
use fpboost::eignash::eignash_iterate;
use fpboost::games::{builtin, hedge_step, normalize_payoffs, HedgeMode, HedgeParams};
use fpboost::linops::{google_matrix, truncated_exp_apply};
use fpboost::power::{exp_power_iterate, PowerConfig, Truncation};
use fpboost::replicator::{integrate_orbit, OrbitConfig};
use fpboost::rng::{random_strategy, unit_draws};
use fpboost::zerosum::{solve_hedge_average, solve_stable_average, SolveOptions};
use fpboost::{Matrix, Strategy};

fn ring_graph(n: usize) -> Matrix {
    let jumps = unit_draws(n, 11);
    let mut edges = Vec::with_capacity(3 * n);
    for (i, jump) in jumps.iter().enumerate() {
        edges.push((i, (i + 1) % n));
        edges.push((i, (i * 7 + 3) % n));
        edges.push((i, (jump * n as f64) as usize % n));
    }
    google_matrix(&edges, n, 0.85).unwrap()
}

fn power_methods(c: &mut Criterion) {
    let g = ring_graph(5_000);
    let x0 = vec![1.0; g.n()];
    let mut group = c.benchmark_group("pagerank_5000");
    for (name, truncation) in [("simple", Truncation::Order(0)), ("m3", Truncation::Order(3)), ("exact", Truncation::Exact)] {
        let cfg = PowerConfig { alpha: 1.0, truncation, tol: 1e-9, ..PowerConfig::default() };
        group.bench_function(name, |b| b.iter(|| exp_power_iterate(&g, black_box(&x0), &cfg).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("truncated_exp_apply");
    for m in [1usize, 4, 16] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| truncated_exp_apply(&g, 1.0, m, black_box(&x0)).unwrap())
        });
    }
    group.finish();
}

fn hedge(c: &mut Criterion) {
    let game = normalize_payoffs(&builtin::rps()).unwrap();
    let opts = SolveOptions::default();
    c.bench_function("zerosum_rps_eps0.01_log", |b| {
        b.iter(|| solve_hedge_average(&game, black_box(0.01), HedgeMode::LogDomain, &opts).unwrap())
    });
    c.bench_function("zerosum_rps_eps0.01_pure", |b| b.iter(|| solve_stable_average(&game, black_box(0.01), &opts).unwrap()));

    let n = 200;
    let data = unit_draws(n * n, 5);
    let m = Matrix::dense(n, data).unwrap();
    let x = random_strategy(n, 6);
    for mode in [HedgeMode::Naive, HedgeMode::LogDomain] {
        let p = HedgeParams::new(0.5, mode).unwrap();
        c.bench_function(&format!("hedge_step_200_{mode:?}"), |b| b.iter(|| hedge_step(&m, black_box(&x), p).unwrap()));
    }
}

fn dynamics(c: &mut Criterion) {
    let x0 = Strategy::new(vec![0.5, 0.25, 0.25]).unwrap();
    let cfg = OrbitConfig { t_end: 10.0, dt: 0.01, record_every: 100, target: None };
    c.bench_function("replicator_rps_t10", |b| b.iter(|| integrate_orbit(&builtin::rps(), black_box(&x0), &cfg).unwrap()));

    let shapley = normalize_payoffs(&builtin::shapley6()).unwrap().normalized;
    let start = random_strategy(6, 1);
    c.bench_function("clairvoyant_shapley6_100", |b| {
        b.iter(|| run_clairvoyant(&shapley, black_box(&start), 0.01, 100, false).unwrap())
    });

    let m = Matrix::dense(20, unit_draws(400, 9)).unwrap();
    c.bench_function("eignash_random20_10", |b| b.iter(|| eignash_iterate(&m, black_box(&Strategy::uniform(20)), 10).unwrap()));
}

criterion_group!(benches, power_methods, hedge, dynamics);
criterion_main!(benches);
