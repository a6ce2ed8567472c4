//! Sampler sweep throughput. With the default `parallel` feature the sweep
//! runs on one worker and on every available core; build with
//! `--no-default-features` to time the sequential fallback.
//!
//! `cargo bench -p msl-unmix --bench sweeps`

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msl_unmix::sampler::{DataView, Sampler};
use msl_unmix::sim::{default_delays, default_eta, make_irf_set, make_library, make_scene, simulate_cube, SceneSpec};
use msl_unmix::{par, validate_inputs, Problem, SamplerConfig};

fn problem(side: usize) -> Problem {
    let (l, r, t) = (8, 4, 160);
    let lib = make_library(l, r).unwrap();
    let irf = make_irf_set(t, 2.0, l, (18.0, 24.0), &default_eta(l), &default_delays(l)).unwrap();
    let sup = Problem::default_support(&irf).unwrap();
    let mut spec = SceneSpec::standard(l, r, t, 1);
    spec.n_row = side;
    spec.n_col = side;
    spec.support = Some(sup);
    let scene = make_scene(&spec, &lib).unwrap();
    let sim = simulate_cube(&scene, &lib, &irf, 3.0, 1).unwrap();
    validate_inputs(sim.cube, lib, sim.irf, sup).unwrap()
}

fn sweeps(c: &mut Criterion) {
    let problem = problem(48);
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mode = if cfg!(feature = "parallel") { "rayon" } else { "sequential" };
    let mut workers = vec![1];
    if cfg!(feature = "parallel") && cores > 1 {
        workers.push(cores);
    }
    let mut group = c.benchmark_group(format!("sweep_48x48x8/{mode}"));
    group.sample_size(20);
    for w in workers {
        let cfg = SamplerConfig { n_mc: 1_000_000, n_bi: 10, seed: 3, tv: true, workers: w, ..SamplerConfig::default() };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{w}_workers")), &w, |b, &w| {
            par::with_workers(w, || {
                let mut s = Sampler::new(&problem.lib, DataView::Histogram(&problem.stats), cfg.clone()).unwrap();
                b.iter(|| s.step().unwrap());
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
