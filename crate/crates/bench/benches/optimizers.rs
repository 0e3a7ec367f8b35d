use std::hint::black_box;

use colpitts_sync::{
    fd_gradient, pso_optimize, sso_optimize, Bounds, Execution, GainObjective, OscillatorParams, PsoConfig,
    SimConfig, SsoConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn cheap_objective() -> GainObjective {
    let cfg = SimConfig { dt: 1e-2, t_final: 20.0, t_activate: 0.0, ..SimConfig::default() };
    GainObjective::new(OscillatorParams::TYPICAL, cfg).unwrap()
}

fn gradient(c: &mut Criterion) {
    let b = Bounds::new(vec![-5.0; 2], vec![5.0; 2]).unwrap();
    let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1] * x[1];
    c.bench_function("fd gradient, quadratic", |bench| {
        bench.iter(|| fd_gradient(&f, black_box(&[1.0, -2.0]), &[1e-5, 1e-5], &b))
    });
}

fn optimizers(c: &mut Criterion) {
    let obj = cheap_objective();
    let f = |x: &[f64]| obj.evaluate(x);
    let mut group = c.benchmark_group("optimizers, short horizon");
    group.sample_size(10);
    for exec in [Execution::Serial, Execution::Parallel] {
        let sso = SsoConfig { np: 20, stages: 5, execution: exec, ..SsoConfig::default() };
        group.bench_function(format!("sso {exec:?}"), |b| b.iter(|| sso_optimize(&f, &sso).unwrap().best_cost));
        let pso = PsoConfig { swarm: 20, iters: 20, execution: exec, ..PsoConfig::default() };
        group.bench_function(format!("pso {exec:?}"), |b| b.iter(|| pso_optimize(&f, &pso).unwrap().best_cost));
    }
    group.finish();
}

criterion_group!(benches, gradient, optimizers);
criterion_main!(benches);
