//! Command-line front end: `simulate`, `unmix`, `ml-depth`, `pfa`, `eval`
//! and `resume`.
//!
//! Exit codes: 0 on success, 2 when inputs or arguments fail validation,
//! 3 when a run fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use msl_unmix::estimators::{label_f1, ml_depth_baseline, rmse, EstimateBundle, MlMode};
use msl_unmix::io::{
    read_checkpoint, read_config, read_cube, read_delays, read_endmembers, read_irf, read_matrix, write_checkpoint,
    write_cube, write_endmembers, write_irf, write_maps, write_matrix, CheckpointFile, RunConfig,
};
use msl_unmix::pfa::{integrate_cube, pfa_unmix, reduce};
use msl_unmix::sampler::{Checkpoint, DataView, Hooks, Progress, Sampler};
use msl_unmix::sim::{default_delays, default_eta, make_irf_set, make_library, make_scene, simulate_cube, SceneSpec};
use msl_unmix::{build_suff_stats, depth_bins_to_mm, par, validate_inputs, ChainOutput, DepthSupport, Error, GridDims, Problem};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "MSL_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "msl", version, about = "Robust spectral unmixing and depth estimation for multispectral single-photon Lidar")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting, applied after the file; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads, 0 for all cores; overrides MSL_WORKERS
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct Inputs {
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long)]
    endmembers: Option<PathBuf>,
    #[arg(long)]
    irf: Option<PathBuf>,
    /// Per-pixel delay map
    #[arg(long)]
    delays: Option<PathBuf>,
    #[arg(long)]
    t_min: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scene, its photon cube and ground truth
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Mean photons per pixel and band
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Dim backboard: about half of the pixels stay empty at budget 1
        #[arg(long)]
        dim_backboard: bool,
    },
    /// Full sampler on a photon cube
    Unmix {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Total-variation depth prior
        #[arg(long)]
        tv: bool,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        checkpoint_every: Option<usize>,
        /// Stop after this many sweeps, leaving a resumable checkpoint
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Pixel-wise maximum-likelihood depth
    MlDepth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Use one band (1-based)
        #[arg(long, conflicts_with = "joint")]
        band: Option<usize>,
        /// Use all bands jointly (default)
        #[arg(long)]
        joint: bool,
    },
    /// Depth-free unmixing of the integrated counts
    Pfa {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run even when the response sums vary over the depth support
        #[arg(long)]
        force: bool,
    },
    /// Compare estimated maps with a reference directory
    Eval {
        #[arg(long)]
        est: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Bin width in picoseconds
        #[arg(long, default_value_t = 2.0)]
        bin_ps: f64,
    },
    /// Continue an interrupted `unmix` run from its checkpoint
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Worker threads, 0 for all cores; overrides MSL_WORKERS
        #[arg(long)]
        workers: Option<usize>,
        /// Stop after this many sweeps in total
        #[arg(long)]
        stop_after: Option<usize>,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) | Error::InvalidArgument(_) | Error::Parse { .. } => Failure::Invalid(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            EXIT_INVALID
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Simulate { common, out, budget, seed, dim_backboard } => {
            let mut cfg = load_config(&common)?;
            set_opt(&mut cfg.out, out);
            set_opt(&mut cfg.budget, budget);
            set_opt(&mut cfg.sampler.seed, seed);
            simulate(&cfg, dim_backboard)
        }
        Command::Unmix { common, inputs, tv, iters, burnin, seed, alpha, nu, checkpoint_every, stop_after } => {
            let mut cfg = load_config(&common)?;
            apply_inputs(&mut cfg, inputs);
            cfg.sampler.tv |= tv;
            set_opt(&mut cfg.sampler.n_mc, iters);
            set_opt(&mut cfg.sampler.n_bi, burnin);
            set_opt(&mut cfg.sampler.seed, seed);
            set_opt(&mut cfg.sampler.initial.alpha, alpha);
            set_opt(&mut cfg.sampler.initial.nu, nu);
            set_opt(&mut cfg.checkpoint_every, checkpoint_every);
            unmix(&cfg, stop_after)
        }
        Command::MlDepth { common, inputs, band, joint: _ } => {
            let mut cfg = load_config(&common)?;
            apply_inputs(&mut cfg, inputs);
            ml_depth(&cfg, band)
        }
        Command::Pfa { common, inputs, iters, burnin, seed, force } => {
            let mut cfg = load_config(&common)?;
            apply_inputs(&mut cfg, inputs);
            set_opt(&mut cfg.sampler.n_mc, iters);
            set_opt(&mut cfg.sampler.n_bi, burnin);
            set_opt(&mut cfg.sampler.seed, seed);
            pfa(&cfg, force)
        }
        Command::Eval { est, reference, bin_ps } => eval(&est, &reference, bin_ps),
        Command::Resume { checkpoint, workers, stop_after } => resume(&checkpoint, workers, stop_after),
    }
}

fn set_opt<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Worker count: flag, then environment, then configuration.
fn resolve_workers(flag: Option<usize>, configured: usize) -> CliResult<usize> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Invalid(format!("{WORKERS_ENV}: cannot parse {v:?}"))),
        Err(_) => Ok(configured),
    }
}

fn load_config(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => read_config(p)?,
        None => RunConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Invalid(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim()).map_err(Failure::Invalid)?;
    }
    let configured = cfg.sampler.workers;
    cfg.sampler.workers = resolve_workers(common.workers, configured)?;
    Ok(cfg)
}

fn apply_inputs(cfg: &mut RunConfig, i: Inputs) {
    cfg.cube = i.cube.or(cfg.cube.take());
    cfg.endmembers = i.endmembers.or(cfg.endmembers.take());
    cfg.irf = i.irf.or(cfg.irf.take());
    cfg.delays = i.delays.or(cfg.delays.take());
    cfg.t_min = i.t_min.or(cfg.t_min);
    cfg.t_max = i.t_max.or(cfg.t_max);
    set_opt(&mut cfg.out, i.out);
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> CliResult<&'a Path> {
    p.as_deref().ok_or_else(|| Failure::Invalid(format!("missing --{what}")))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn support(cfg: &RunConfig, irf: &msl_unmix::ImpulseResponseSet) -> CliResult<DepthSupport> {
    let default = Problem::default_support(irf)?;
    Ok(DepthSupport { t_min: cfg.t_min.unwrap_or(default.t_min), t_max: cfg.t_max.unwrap_or(default.t_max) })
}

/// Reads the responses and optional delay map for a cube with `n_bin` bins.
fn load_irf(cfg: &RunConfig, n_bin: usize) -> CliResult<msl_unmix::ImpulseResponseSet> {
    let irf = read_irf(required(&cfg.irf, "irf")?, n_bin)?;
    Ok(match &cfg.delays {
        Some(p) => irf.with_delays(Some(read_delays(p)?)),
        None => irf,
    })
}

fn load_problem(cfg: &RunConfig) -> CliResult<Problem> {
    let cube = read_cube(required(&cfg.cube, "cube")?)?;
    let lib = read_endmembers(required(&cfg.endmembers, "endmembers")?)?;
    let irf = load_irf(cfg, cube.dims().n_bin)?;
    let sup = support(cfg, &irf)?;
    Ok(validate_inputs(cube, lib, irf, sup)?)
}

fn simulate(cfg: &RunConfig, dim_backboard: bool) -> CliResult<()> {
    let seed = cfg.sampler.seed;
    let lib = make_library(cfg.n_band, cfg.n_endmember)?;
    let irf = make_irf_set(cfg.n_bin, cfg.bin_ps, cfg.n_band, (cfg.fwhm_ps, cfg.fwhm_ps), &default_eta(cfg.n_band), &default_delays(cfg.n_band))?;
    let sup = support(cfg, &irf)?;
    let mut spec = if dim_backboard {
        SceneSpec::dim_backboard(cfg.n_band, cfg.n_endmember, cfg.n_bin, seed)
    } else {
        SceneSpec::standard(cfg.n_band, cfg.n_endmember, cfg.n_bin, seed)
    };
    spec.n_row = cfg.n_row;
    spec.n_col = cfg.n_col;
    spec.bin_ps = cfg.bin_ps;
    spec.support = Some(sup);
    let scene = make_scene(&spec, &lib)?;
    let sim = simulate_cube(&scene, &lib, &irf, cfg.budget, seed)?;

    let out = &cfg.out;
    let truth = out.join("truth");
    create_dir(&truth)?;
    write_cube(&out.join("cube.txt"), &sim.cube)?;
    write_endmembers(&out.join("endmembers.csv"), &lib)?;
    write_irf(&out.join("irf.txt"), &sim.irf)?;
    let dims = scene.dims;
    let (nr, nc, nb, ne) = (dims.n_row, dims.n_col, dims.n_band, scene.n_endmember);
    write_matrix(&truth.join("depth_bins.csv"), &scene.t, nr, nc)?;
    let mm: Vec<f64> = scene.t.iter().map(|&t| depth_bins_to_mm(t, &dims, sup.t_min)).collect::<Result<_, _>>()?;
    write_matrix(&truth.join("depth_mm.csv"), &mm, nr, nc)?;
    for r in 0..ne {
        let map: Vec<f64> = scene.a.iter().skip(r).step_by(ne).copied().collect();
        write_matrix(&truth.join(format!("abundance_{}.csv", r + 1)), &map, nr, nc)?;
    }
    write_matrix(&truth.join("labels.csv"), &scene.z, nr, nc * nb)?;
    write_matrix(&truth.join("anomalies.csv"), &scene.r, nr, nc * nb)?;
    println!(
        "simulated {nr}x{nc}x{nb}x{} cube: {} photons, mean {:.3} per pixel and band, {:.1}% empty pixels",
        dims.n_bin,
        sim.cube.total_photons(),
        sim.cube.mean_photons(),
        100.0 * sim.cube.empty_pixel_fraction()
    );
    Ok(())
}

fn report_every(n_mc: usize) -> usize {
    (n_mc / 20).max(1)
}

/// Runs a fresh chain (`resume` is `None`) or continues a checkpointed
/// one. An interrupted run leaves a checkpoint; a complete one writes maps.
fn drive(run: &RunConfig, problem: &Problem, resume: Option<Checkpoint>, stop_after: Option<usize>) -> CliResult<()> {
    if let Some(ck) = &resume {
        if ck.state.acc.sup != problem.sup {
            return Err(Failure::Runtime("depth support differs from the checkpointed run".into()));
        }
    }
    let ck_path = run.out.join("checkpoint.json");
    create_dir(&run.out)?;
    let every = report_every(run.sampler.n_mc);
    let mut progress = |p: &Progress| {
        if p.sweep.is_multiple_of(every) || p.sweep == p.n_mc {
            eprintln!("sweep {}/{}  log-lik {:.3}  eps {:.4}", p.sweep, p.n_mc, p.log_lik, p.theta.eps);
        }
    };
    let save = |ck: &Checkpoint| write_checkpoint(&ck_path, &CheckpointFile { run: run.clone(), checkpoint: ck.clone() });
    let mut save_hook = save;
    let out = par::with_workers(run.sampler.workers, || -> msl_unmix::Result<Option<ChainOutput>> {
        let view = DataView::Histogram(&problem.stats);
        let mut s = match resume {
            Some(ck) => Sampler::from_state(&problem.lib, view, ck.config, ck.state)?,
            None => Sampler::new(&problem.lib, view, run.sampler.clone())?,
        };
        let mut hooks = Hooks {
            progress: Some(&mut progress),
            checkpoint: Some(&mut save_hook),
            checkpoint_every: run.checkpoint_every,
            stop_after,
        };
        s.run(&mut hooks)?;
        if s.is_complete() {
            Ok(Some(s.finish()))
        } else {
            save(&s.checkpoint())?;
            Ok(None)
        }
    })?;
    let Some(out) = out else {
        eprintln!("stopped early; checkpoint written to {}", ck_path.display());
        return Ok(());
    };
    let dims = *problem.cube.dims();
    let bundle = EstimateBundle::from_accumulator(&out.acc, &dims, problem.sup.t_min, out.config.depth_estimator)?;
    let written = write_maps(&bundle, &run.out)?;
    println!(
        "{} sweeps done; mean confidence {:.3}; eps {:.4}; {} files written to {}",
        out.traces.log_lik.len(),
        bundle.mean_confidence(),
        out.theta_hat.eps,
        written.len(),
        run.out.display()
    );
    Ok(())
}

fn unmix(cfg: &RunConfig, stop_after: Option<usize>) -> CliResult<()> {
    cfg.sampler.check()?;
    let problem = load_problem(cfg)?;
    drive(cfg, &problem, None, stop_after)
}

fn resume(path: &Path, workers: Option<usize>, stop_after: Option<usize>) -> CliResult<()> {
    let mut file = read_checkpoint(path)?;
    file.run.sampler.workers = resolve_workers(workers, file.run.sampler.workers)?;
    file.checkpoint.config.workers = file.run.sampler.workers;
    let problem = load_problem(&file.run)?;
    drive(&file.run, &problem, Some(file.checkpoint), stop_after)
}

fn ml_depth(cfg: &RunConfig, band: Option<usize>) -> CliResult<()> {
    let cube = read_cube(required(&cfg.cube, "cube")?)?;
    let irf = load_irf(cfg, cube.dims().n_bin)?;
    let sup = support(cfg, &irf)?;
    let dims = *cube.dims();
    let mode = match band {
        Some(b) if (1..=dims.n_band).contains(&b) => MlMode::Band(b - 1),
        Some(b) => return Err(Failure::Invalid(format!("--band {b} outside 1..={}", dims.n_band))),
        None => MlMode::Joint,
    };
    if irf.n_band() != dims.n_band {
        return Err(Failure::Invalid(format!("responses have {} bands, cube has {}", irf.n_band(), dims.n_band)));
    }
    if !sup.fits(dims.n_bin) {
        return Err(Failure::Invalid(format!("depth support {}..={} does not fit 1..={}", sup.t_min, sup.t_max, dims.n_bin)));
    }
    let stats = build_suff_stats(&cube, &irf, sup);
    let t = ml_depth_baseline(&cube, &irf, &stats, mode)?;
    create_dir(&cfg.out)?;
    write_matrix(&cfg.out.join("depth_bins.csv"), &t, dims.n_row, dims.n_col)?;
    let mm: Vec<f64> = t.iter().map(|&v| depth_bins_to_mm(v, &dims, sup.t_min)).collect::<Result<_, _>>()?;
    write_matrix(&cfg.out.join("depth_mm.csv"), &mm, dims.n_row, dims.n_col)?;
    println!("ML depth written to {}", cfg.out.display());
    Ok(())
}

fn pfa(cfg: &RunConfig, force: bool) -> CliResult<()> {
    cfg.sampler.check()?;
    let problem = load_problem(cfg)?;
    let obs = reduce(&problem.stats);
    debug_assert_eq!(obs.counts.y, integrate_cube(&problem.cube).y);
    let (est, _) = pfa_unmix(&obs, &problem.lib, &cfg.sampler, force)?;
    let dims = problem.cube.dims();
    let (nr, nc, nb, ne) = (dims.n_row, dims.n_col, dims.n_band, problem.lib.n_endmember());
    create_dir(&cfg.out)?;
    for r in 0..ne {
        let map: Vec<f64> = est.abundances.iter().skip(r).step_by(ne).copied().collect();
        write_matrix(&cfg.out.join(format!("abundance_{}.csv", r + 1)), &map, nr, nc)?;
    }
    write_matrix(&cfg.out.join("labels.csv"), &est.labels, nr, nc * nb)?;
    write_matrix(&cfg.out.join("anomalies.csv"), &est.anomalies, nr, nc * nb)?;
    write_matrix(&cfg.out.join("anomaly_log_intensity.csv"), &est.anomaly_log_intensity, nr, nc)?;
    println!("reduced-model maps written to {} (response variation {:.2e})", cfg.out.display(), obs.variation);
    Ok(())
}

fn read_map(dir: &Path, name: &str) -> CliResult<(usize, usize, Vec<f64>)> {
    Ok(read_matrix(&dir.join(name))?)
}

fn eval(est: &Path, reference: &Path, bin_ps: f64) -> CliResult<()> {
    let (er, ec, e) = read_map(est, "depth_bins.csv")?;
    let (rr, rc, r) = read_map(reference, "depth_bins.csv")?;
    if (er, ec) != (rr, rc) {
        return Err(Failure::Invalid(format!("depth maps are {er}x{ec} and {rr}x{rc}")));
    }
    let to_bins = |v: &[f64]| -> CliResult<Vec<usize>> {
        v.iter()
            .map(|&x| if x >= 1.0 && x.fract() == 0.0 { Ok(x as usize) } else { Err(Failure::Invalid(format!("depth bin {x} is not a positive integer"))) })
            .collect()
    };
    let (e, r) = (to_bins(&e)?, to_bins(&r)?);
    let n_bin = e.iter().chain(&r).copied().max().unwrap_or(1);
    let dims = GridDims::new(er, ec, 1, n_bin, bin_ps)?;
    println!("depth_rmse_mm {:.3}", rmse(&e, &r, &dims)?);
    let (le, lr) = (est.join("labels.csv"), reference.join("labels.csv"));
    if le.exists() && lr.exists() {
        let (_, _, a) = read_matrix(&le)?;
        let (_, _, b) = read_matrix(&lr)?;
        let to_u8 = |v: Vec<f64>| v.into_iter().map(|x| (x > 0.5) as u8).collect::<Vec<_>>();
        println!("label_f1 {:.3}", label_f1(&to_u8(a), &to_u8(b))?);
    }
    Ok(())
}
