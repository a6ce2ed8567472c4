//! Synthetic benchmark: depth RMSE, mean confidence and anomaly-label F1 of
//! the ML baseline and of the sampler with and without the TV prior, over
//! photon budgets.
//!
//! `cargo run --release --example benchmark -- [sweeps] [burn-in] [seed]`

use std::time::Instant;

use msl_unmix::estimators::{label_f1, ml_depth_baseline, rmse, EstimateBundle, MlMode};
use msl_unmix::sampler::{run_chain, SamplerConfig};
use msl_unmix::sim::{default_delays, default_eta, make_irf_set, make_library, make_scene, simulate_cube, SceneSpec};
use msl_unmix::{validate_inputs, DepthEstimator, Problem};

fn main() -> msl_unmix::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_mc = args.first().copied().unwrap_or(1500) as usize;
    let n_bi = args.get(1).copied().unwrap_or(500) as usize;
    let seed = args.get(2).copied().unwrap_or(1);

    let (l, r, t) = (8, 4, 160);
    let lib = make_library(l, r)?;
    let irf = make_irf_set(t, 2.0, l, (18.0, 24.0), &default_eta(l), &default_delays(l))?;
    let sup = Problem::default_support(&irf)?;
    let mut spec = SceneSpec::standard(l, r, t, seed);
    spec.support = Some(sup);
    let scene = make_scene(&spec, &lib)?;
    println!("64x64 scene, L={l}, R={r}, T={t}, depth support {}..={}", sup.t_min, sup.t_max);

    for budget in [1.0, 3.0, 10.0] {
        let sim = simulate_cube(&scene, &lib, &irf, budget, seed)?;
        println!("budget {budget}: {:.3} photons per pixel and band, {:.1}% empty pixels", sim.cube.mean_photons(), 100.0 * sim.cube.empty_pixel_fraction());
        let problem = validate_inputs(sim.cube, lib.clone(), sim.irf, sup)?;
        let dims = *problem.cube.dims();
        let ml = ml_depth_baseline(&problem.cube, &problem.irf, &problem.stats, MlMode::Joint)?;
        println!("  ML         rmse {:.3} mm", rmse(&ml, &scene.t, &dims)?);
        for tv in [false, true] {
            let mut cfg = SamplerConfig { n_mc, n_bi, seed, tv, ..SamplerConfig::default() };
            cfg.initial.nu = 0.4;
            let start = Instant::now();
            let out = run_chain(&problem, &cfg)?;
            let b = EstimateBundle::from_accumulator(&out.acc, &dims, sup.t_min, DepthEstimator::RaoBlackwell)?;
            println!(
                "  {:<10} rmse {:.3} mm, confidence {:.3}, label F1 {:.3}, HMC acceptance {:.2}, eps {:.3}, {:.1} s",
                if tv { "sampler+TV" } else { "sampler" },
                rmse(&b.depth_bins, &scene.t, &dims)?,
                b.mean_confidence(),
                label_f1(&b.labels, &scene.z)?,
                out.post_burn_in_accept(),
                out.theta_hat.eps,
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
