//! Metropolis-within-Gibbs sampler over depths, abundances, auxiliaries,
//! anomaly labels and anomaly values, with stochastic-approximation
//! adaptation of the MRF hyperparameters during burn-in.
//!
//! One sweep visits, in order: abundances (HMC), auxiliaries, depths,
//! labels, anomaly values and, during burn-in, the hyperparameters.

pub mod abundance;
pub mod anomaly;
pub mod aux;
pub mod depth;
pub mod gamma;
pub mod labels;
pub mod sapg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{joint_ml_depths, pooled_ml_depths, Accumulator, DepthEstimator, Sample};
use crate::grid::DepthSupport;
use crate::library::EndmemberLibrary;
use crate::likelihood::{reduced_term, SuffStats};
use crate::par;
use crate::priors::gmrf::{beta_at, gmrf_c_score};
use crate::priors::ising::{ising_suff_stats, IsingBeta, IsingStats};
use crate::priors::tv::tv_potential;
use crate::problem::Problem;
use crate::rng::Stage;
use crate::state::{HyperParams, SceneState};

pub use abundance::{HmcConfig, HmcSlot};
pub use aux::AuxChains;
pub use sapg::{SapgConfig, SapgSteps, ThetaGradient};

/// Switches for the individual kernels. A disabled kernel leaves its
/// block at the initial value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelMask {
    pub abundance: bool,
    pub gamma: bool,
    pub depth: bool,
    pub labels: bool,
    pub anomaly: bool,
}

impl Default for KernelMask {
    fn default() -> Self {
        Self { abundance: true, gamma: true, depth: true, labels: true, anomaly: true }
    }
}

/// Starting values of the hyperparameters; `c` is shared by every endmember.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialHyper {
    pub alpha: f64,
    pub nu: f64,
    pub eps: f64,
    pub beta_n: f64,
    pub beta_l: f64,
    pub beta_0: f64,
    pub c: f64,
}

impl Default for InitialHyper {
    fn default() -> Self {
        Self { alpha: 1.0, nu: 0.05, eps: 0.1, beta_n: 0.3, beta_l: 0.3, beta_0: 0.9, c: 5.0 }
    }
}

impl InitialHyper {
    pub fn to_params(&self, n_endmember: usize) -> Result<HyperParams> {
        HyperParams::new(self.alpha, self.nu, self.eps, self.beta_n, self.beta_l, self.beta_0, vec![self.c; n_endmember])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total number of sweeps.
    pub n_mc: usize,
    /// Burn-in sweeps; hyperparameters and HMC steps adapt only here.
    pub n_bi: usize,
    /// Keep every `thin`-th post-burn-in sweep.
    pub thin: usize,
    pub seed: u64,
    /// Total-variation prior on the depths.
    pub tv: bool,
    pub kernels: KernelMask,
    pub hmc: HmcConfig,
    pub sapg: SapgConfig,
    /// Adapt `θ` during burn-in; otherwise it stays at `initial`.
    pub adapt_theta: bool,
    pub initial: InitialHyper,
    /// Keep full post-burn-in states besides the running sums.
    pub store_samples: bool,
    pub depth_estimator: DepthEstimator,
    /// Worker threads, 0 for the runtime default.
    pub workers: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_mc: 5000,
            n_bi: 2000,
            thin: 1,
            seed: 0,
            tv: true,
            kernels: KernelMask::default(),
            hmc: HmcConfig::default(),
            sapg: SapgConfig::default(),
            adapt_theta: true,
            initial: InitialHyper::default(),
            store_samples: false,
            depth_estimator: DepthEstimator::RaoBlackwell,
            workers: 0,
        }
    }
}

impl SamplerConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.n_bi < self.n_mc) {
            return Err(Error::invalid(format!("burn-in ({}) must be shorter than the chain ({})", self.n_bi, self.n_mc)));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thinning factor must be at least 1"));
        }
        if self.hmc.n_leapfrog == 0 || !(self.hmc.initial_step > 0.0) {
            return Err(Error::invalid("HMC needs at least one leapfrog step and a positive step size"));
        }
        if !(0.0..1.0).contains(&self.sapg.average_fraction) {
            return Err(Error::invalid("average_fraction must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Number of states the chain keeps after burn-in.
    pub fn n_kept(&self) -> usize {
        (self.n_mc - self.n_bi) / self.thin
    }
}

/// Per-sweep scalar traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    /// Joint log-likelihood without `Σ log y!`.
    pub log_lik: Vec<f64>,
    /// TV potential of the depth field.
    pub tv: Vec<f64>,
    pub ising: Vec<IsingStats>,
    /// `θ` after each sweep.
    pub theta: Vec<HyperParams>,
    /// Mean HMC acceptance probability, 0 when the kernel is off.
    pub hmc_accept: Vec<f64>,
    pub anomaly_accept: Vec<f64>,
}

/// Everything needed to continue a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    /// Completed sweeps.
    pub sweep: usize,
    pub scene: SceneState,
    pub theta: HyperParams,
    pub hmc: Vec<HmcSlot>,
    pub aux: AuxChains,
    pub steps: SapgSteps,
    pub theta_sum: Option<(HyperParams, usize)>,
    pub acc: Accumulator,
    pub traces: Traces,
    pub samples: Vec<Sample>,
}

/// Serialised form of a paused chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: SamplerConfig,
    pub state: ChainState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub config: SamplerConfig,
    pub theta_hat: HyperParams,
    pub acc: Accumulator,
    pub traces: Traces,
    /// Thinned post-burn-in states, when requested.
    pub samples: Vec<Sample>,
    pub final_state: SceneState,
    /// Frozen per-pixel HMC step sizes.
    pub hmc_steps: Vec<f64>,
}

impl ChainOutput {
    /// Mean HMC acceptance probability over the post-burn-in sweeps.
    pub fn post_burn_in_accept(&self) -> f64 {
        let v = &self.traces.hmc_accept[self.config.n_bi..];
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

/// How the photon data enter the likelihood.
#[derive(Debug, Clone, Copy)]
pub enum DataView<'a> {
    /// Full histograms through their look-up tables; depths are sampled.
    Histogram(&'a SuffStats),
    /// Integrated counts with per-band constants `g̃_l`; depths are absent.
    Integrated { y_tilde: &'a [f64], g_tilde: &'a [f64], n_row: usize, n_col: usize },
}

impl DataView<'_> {
    fn shape(&self) -> (usize, usize) {
        match self {
            DataView::Histogram(s) => (s.dims().n_row, s.dims().n_col),
            &DataView::Integrated { n_row, n_col, .. } => (n_row, n_col),
        }
    }

    fn y_tilde(&self) -> &[f64] {
        match self {
            DataView::Histogram(s) => s.y_tilde(),
            DataView::Integrated { y_tilde, .. } => y_tilde,
        }
    }

    fn support(&self) -> DepthSupport {
        match self {
            DataView::Histogram(s) => *s.support(),
            DataView::Integrated { .. } => DepthSupport { t_min: 1, t_max: 1 },
        }
    }
}

/// Progress report handed to the callback after every sweep.
#[derive(Debug, Clone)]
pub struct Progress<'a> {
    pub sweep: usize,
    pub n_mc: usize,
    pub log_lik: f64,
    pub theta: &'a HyperParams,
}

pub type ProgressFn<'a> = dyn FnMut(&Progress) + Send + 'a;
pub type CheckpointFn<'a> = dyn FnMut(&Checkpoint) -> Result<()> + Send + 'a;

/// Optional callbacks of a run.
#[derive(Default)]
pub struct Hooks<'a> {
    pub progress: Option<&'a mut ProgressFn<'a>>,
    /// Called with the full state every `checkpoint_every` sweeps.
    pub checkpoint: Option<&'a mut CheckpointFn<'a>>,
    pub checkpoint_every: usize,
    /// Stop once this many sweeps are complete, leaving the chain resumable.
    pub stop_after: Option<usize>,
}

pub struct Sampler<'a> {
    lib: &'a EndmemberLibrary,
    data: DataView<'a>,
    cfg: SamplerConfig,
    state: ChainState,
    n_row: usize,
    n_col: usize,
    /// `M a`, `[pixel][band]`.
    mix: Vec<f64>,
    /// `g̃` at the current depths, `[pixel][band]`.
    gt: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(lib: &'a EndmemberLibrary, data: DataView<'a>, cfg: SamplerConfig) -> Result<Self> {
        cfg.check()?;
        let state = initial_state(lib, &data, &cfg)?;
        Self::from_state(lib, data, cfg, state)
    }

    pub fn from_state(lib: &'a EndmemberLibrary, data: DataView<'a>, cfg: SamplerConfig, state: ChainState) -> Result<Self> {
        cfg.check()?;
        let (n_row, n_col) = data.shape();
        let s = &state.scene;
        if s.n_row != n_row || s.n_col != n_col || s.n_band != lib.n_band() || s.n_endmember != lib.n_endmember() {
            return Err(Error::Checkpoint(format!(
                "state is {}x{}x{} with {} endmembers, data are {}x{}x{} with {}",
                s.n_row,
                s.n_col,
                s.n_band,
                s.n_endmember,
                n_row,
                n_col,
                lib.n_band(),
                lib.n_endmember()
            )));
        }
        if data.y_tilde().len() != n_row * n_col * lib.n_band() {
            return Err(Error::invalid("integrated counts do not match the grid"));
        }
        let sup = data.support();
        s.check(sup.t_min, sup.t_max)?;
        let mut me = Self {
            lib,
            data,
            cfg,
            state,
            n_row,
            n_col,
            mix: vec![0.0; n_row * n_col * lib.n_band()],
            gt: vec![0.0; n_row * n_col * lib.n_band()],
        };
        me.refresh_mix();
        me.refresh_gt();
        Ok(me)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { config: self.cfg.clone(), state: self.state.clone() }
    }

    fn n_band(&self) -> usize {
        self.lib.n_band()
    }

    fn refresh_mix(&mut self) {
        let lib = self.lib;
        let (r, l) = (lib.n_endmember(), lib.n_band());
        let a = &self.state.scene.a;
        par::for_each_chunk(&mut self.mix, l, |p, m| lib.mix_into(&a[p * r..(p + 1) * r], m));
    }

    fn refresh_gt(&mut self) {
        let l = self.n_band();
        match self.data {
            DataView::Histogram(stats) => {
                let t = &self.state.scene.t;
                par::for_each_chunk(&mut self.gt, l, |p, g| stats.g_tilde_pixel_into(p, t[p], g));
            }
            DataView::Integrated { g_tilde, .. } => {
                for g in self.gt.chunks_mut(l) {
                    g.copy_from_slice(g_tilde);
                }
            }
        }
    }

    fn lambda(&self) -> Vec<f64> {
        let s = &self.state.scene;
        self.mix.iter().enumerate().map(|(k, &m)| if s.z[k] == 1 { m + s.x[k] } else { m }).collect()
    }

    /// Joint log-likelihood of the current state without `Σ log y!`.
    pub fn log_lik(&self) -> f64 {
        let l = self.n_band();
        let lam = self.lambda();
        let y = self.data.y_tilde();
        let s = &self.state.scene;
        let n_col = self.n_col;
        let data = self.data;
        let gt = &self.gt;
        par::ordered_sum(self.n_row, |i| {
            let mut acc = 0.0;
            for p in i * n_col..(i + 1) * n_col {
                if let DataView::Histogram(stats) = data {
                    acc += stats.depth_base(p)[stats.support().index_of(s.t[p])];
                }
                for k in p * l..(p + 1) * l {
                    acc += reduced_term(y[k], lam[k], gt[k]);
                }
            }
            acc
        })
    }

    fn depth_enabled(&self) -> bool {
        self.cfg.kernels.depth && matches!(self.data, DataView::Histogram(_))
    }

    fn keeps(&self, u: usize) -> bool {
        u > self.cfg.n_bi && (u - self.cfg.n_bi).is_multiple_of(self.cfg.thin)
    }

    /// Runs sweep `state.sweep + 1`.
    pub fn step(&mut self) -> Result<()> {
        let u = self.state.sweep + 1;
        let seed = self.cfg.seed;
        let sw = u as u64;
        let (n_row, n_col, n_band) = (self.n_row, self.n_col, self.n_band());
        let burn = u <= self.cfg.n_bi;
        let keep = self.keeps(u);

        let accept = if self.cfg.kernels.abundance {
            let s = &mut self.state.scene;
            let inp = abundance::AbundanceInputs {
                lib: self.lib,
                y_tilde: self.data.y_tilde(),
                gt: &self.gt,
                z: &s.z,
                x: &s.x,
                gamma: &s.gamma,
                c: &self.state.theta.c,
                n_col,
            };
            let rate = burn.then(|| (u as f64).powf(-0.6));
            abundance::update_abundances(&inp, &mut s.a, &mut self.mix, &mut self.state.hmc, &self.cfg.hmc, rate, seed, sw)
        } else {
            0.0
        };

        if self.cfg.kernels.gamma {
            let s = &mut self.state.scene;
            gamma::update_gamma_aux(&mut s.gamma, &s.a, n_row, n_col, &self.state.theta.c, seed, sw, Stage::Gamma);
        }

        if self.depth_enabled() {
            let DataView::Histogram(stats) = self.data else { unreachable!() };
            let lam = self.lambda();
            let rb = if keep { Some(self.state.acc.depth_rb.as_mut_slice()) } else { None };
            depth::update_depths(stats, &mut self.state.scene.t, &lam, self.state.theta.eps, self.cfg.tv, seed, sw, rb)?;
            self.refresh_gt();
        } else if keep {
            let sup = self.data.support();
            let t_len = sup.len();
            for (p, &t) in self.state.scene.t.iter().enumerate() {
                self.state.acc.depth_rb[p * t_len + sup.index_of(t)] += 1.0;
            }
        }

        let theta = &self.state.theta;
        let beta = IsingBeta { n: theta.beta_n, l: theta.beta_l, zero: theta.beta_0 };
        if self.cfg.kernels.labels {
            let s = &mut self.state.scene;
            labels::update_labels(&mut s.z, &s.x, self.data.y_tilde(), &self.mix, &self.gt, n_row, n_col, n_band, &beta, seed, sw);
        }

        let anomaly_accept = if self.cfg.kernels.anomaly {
            let s = &mut self.state.scene;
            let n = anomaly::update_anomaly_values(
                &mut s.x,
                &s.z,
                self.data.y_tilde(),
                &self.mix,
                &self.gt,
                theta.alpha,
                theta.nu,
                seed,
                sw,
            );
            n as f64 / s.x.len() as f64
        } else {
            0.0
        };

        if burn && self.cfg.adapt_theta {
            self.adapt_theta(u, &beta)?;
        }

        let ll = self.log_lik();
        let s = &self.state.scene;
        let tr = &mut self.state.traces;
        tr.log_lik.push(ll);
        tr.tv.push(tv_potential(&s.t, n_row, n_col));
        tr.ising.push(ising_suff_stats(&s.z, n_row, n_col, n_band));
        tr.theta.push(self.state.theta.clone());
        tr.hmc_accept.push(accept);
        tr.anomaly_accept.push(anomaly_accept);

        if keep {
            self.state.acc.push(s);
            if self.cfg.store_samples {
                self.state.samples.push(Sample::from(s));
            }
        }
        self.state.sweep = u;
        Ok(())
    }

    fn adapt_theta(&mut self, u: usize, beta: &IsingBeta) -> Result<()> {
        let (n_row, n_col, n_band) = (self.n_row, self.n_col, self.n_band());
        let n_end = self.lib.n_endmember();
        let seed = self.cfg.seed;
        let adapt_eps = self.cfg.tv && self.depth_enabled();
        let adapt_beta = self.cfg.kernels.labels;
        let adapt_c = self.cfg.kernels.abundance && self.cfg.kernels.gamma;
        let sup = self.data.support();
        let theta = &self.state.theta;
        self.state.aux.sweep(
            n_row,
            n_col,
            n_band,
            &sup,
            adapt_eps.then_some(theta.eps),
            beta,
            &theta.c,
            seed,
            u as u64,
        )?;

        let n_pix = (n_row * n_col) as f64;
        let n_site = n_pix * n_band as f64;
        let main = &self.state.scene;
        let aux = &self.state.aux;
        let mut g = ThetaGradient { c: vec![0.0; n_end], ..Default::default() };
        if adapt_eps {
            g.eps = (tv_potential(&aux.t, n_row, n_col) - tv_potential(&main.t, n_row, n_col)) / n_pix;
        }
        if adapt_beta {
            let m = ising_suff_stats(&main.z, n_row, n_col, n_band);
            let a = ising_suff_stats(&aux.z, n_row, n_col, n_band);
            g.beta_n = (m.phi_n - a.phi_n) / n_site;
            g.beta_l = (m.phi_l - a.phi_l) / n_site;
            g.beta_0 = ((m.n_zero - m.n_one) - (a.n_zero - a.n_one)) / n_site;
        }
        if adapt_c {
            for r in 0..n_end {
                let am: Vec<f64> = main.a.iter().skip(r).step_by(n_end).copied().collect();
                let aa: Vec<f64> = aux.a.iter().skip(r).step_by(n_end).copied().collect();
                let sm = gmrf_c_score(&am, &main.gamma[r], n_row, n_col);
                let sa = gmrf_c_score(&aa, &aux.gamma[r], n_row, n_col);
                g.c[r] = (sm - sa) / n_pix;
            }
        }

        let cfg = &self.cfg.sapg;
        self.state.steps.resolve(cfg, &self.state.theta, &g);
        let mut next = sapg::sapg_update_hyperparams(&self.state.theta, &g, &self.state.steps, u, cfg);

        let n_bi = self.cfg.n_bi;
        let window = (cfg.average_fraction * n_bi as f64).round() as usize;
        if window > 0 && u > n_bi - window {
            let (sum, n) = self.state.theta_sum.get_or_insert_with(|| (zeroed(&next), 0));
            add_into(sum, &next);
            *n += 1;
            if u == n_bi {
                next = scaled(sum, 1.0 / *n as f64);
            }
        }
        self.state.theta = next;
        Ok(())
    }

    /// Runs until `n_mc` sweeps (or `hooks.stop_after`) are complete.
    pub fn run(&mut self, hooks: &mut Hooks) -> Result<()> {
        let end = hooks.stop_after.map_or(self.cfg.n_mc, |s| s.min(self.cfg.n_mc));
        while self.state.sweep < end {
            self.step()?;
            let u = self.state.sweep;
            if let Some(cb) = hooks.progress.as_mut() {
                cb(&Progress { sweep: u, n_mc: self.cfg.n_mc, log_lik: *self.state.traces.log_lik.last().unwrap(), theta: &self.state.theta });
            }
            if hooks.checkpoint_every > 0 && u.is_multiple_of(hooks.checkpoint_every) {
                if let Some(cb) = hooks.checkpoint.as_mut() {
                    cb(&self.checkpoint())?;
                }
            }
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.state.sweep >= self.cfg.n_mc
    }

    pub fn finish(self) -> ChainOutput {
        let hmc_steps = self.state.hmc.iter().map(|s| s.step).collect();
        ChainOutput {
            config: self.cfg,
            theta_hat: self.state.theta,
            acc: self.state.acc,
            traces: self.state.traces,
            samples: self.state.samples,
            final_state: self.state.scene,
            hmc_steps,
        }
    }
}

fn zeroed(h: &HyperParams) -> HyperParams {
    HyperParams { eps: 0.0, beta_n: 0.0, beta_l: 0.0, beta_0: 0.0, c: vec![0.0; h.c.len()], ..h.clone() }
}

fn add_into(sum: &mut HyperParams, h: &HyperParams) {
    sum.eps += h.eps;
    sum.beta_n += h.beta_n;
    sum.beta_l += h.beta_l;
    sum.beta_0 += h.beta_0;
    for (s, c) in sum.c.iter_mut().zip(&h.c) {
        *s += c;
    }
}

fn scaled(sum: &HyperParams, k: f64) -> HyperParams {
    HyperParams {
        eps: sum.eps * k,
        beta_n: sum.beta_n * k,
        beta_l: sum.beta_l * k,
        beta_0: sum.beta_0 * k,
        c: sum.c.iter().map(|c| c * k).collect(),
        ..sum.clone()
    }
}

/// Starting state: depths at the joint ML estimate, abundances at one
/// global level fitted to the total photon count, auxiliaries at their
/// conditional scale, labels off and anomaly values at the prior mean.
pub fn initial_state(lib: &EndmemberLibrary, data: &DataView, cfg: &SamplerConfig) -> Result<ChainState> {
    let (n_row, n_col) = data.shape();
    let (n_band, n_end) = (lib.n_band(), lib.n_endmember());
    let n = n_row * n_col;
    let theta = cfg.initial.to_params(n_end)?;
    let sup = data.support();

    let t = match data {
        DataView::Histogram(stats) => {
            let t = if cfg.tv { pooled_ml_depths(stats, 1) } else { joint_ml_depths(stats) };
            t.unwrap_or_else(|_| vec![sup.bin_at(sup.len() / 2); n])
        }
        DataView::Integrated { .. } => vec![sup.t_min; n],
    };
    let mut scene = SceneState::uniform(n_row, n_col, n_band, n_end, sup.t_min, 0.0, theta.alpha * theta.nu, 1.0);
    scene.t = t;

    let y_total: f64 = data.y_tilde().iter().sum();
    let row_sum: Vec<f64> = (0..n_band).map(|l| lib.row(l).iter().sum()).collect();
    let mut denom = 0.0;
    for p in 0..n {
        for (l, rs) in row_sum.iter().enumerate() {
            let g = match data {
                DataView::Histogram(stats) => stats.g_tilde(p, l, scene.t[p]),
                DataView::Integrated { g_tilde, .. } => g_tilde[l],
            };
            denom += rs * g;
        }
    }
    let level = if denom > 0.0 { (y_total / denom).max(1e-3) } else { 1.0 };
    scene.a.fill(level);
    let stride = n_col + 1;
    for (r, g) in scene.gamma.iter_mut().enumerate() {
        for (k, v) in g.iter_mut().enumerate() {
            *v = beta_at(|p| scene.a[p * n_end + r], n_row, n_col, k / stride, k % stride);
        }
    }

    let aux = AuxChains { t: scene.t.clone(), z: vec![0; n * n_band], a: scene.a.clone(), gamma: scene.gamma.clone() };
    let hmc = vec![HmcSlot { step: cfg.hmc.initial_step, accept: 0.0 }; n];
    Ok(ChainState {
        sweep: 0,
        theta,
        hmc,
        aux,
        steps: SapgSteps::unresolved(n_end),
        theta_sum: None,
        acc: Accumulator::new(n, n_band, n_end, sup),
        traces: Traces::default(),
        samples: Vec::new(),
        scene,
    })
}

/// Runs a full chain on a validated problem.
pub fn run_chain(problem: &Problem, cfg: &SamplerConfig) -> Result<ChainOutput> {
    run_chain_with(problem, cfg, &mut Hooks::default())
}

pub fn run_chain_with(problem: &Problem, cfg: &SamplerConfig, hooks: &mut Hooks) -> Result<ChainOutput> {
    par::with_workers(cfg.workers, || {
        let mut s = Sampler::new(&problem.lib, DataView::Histogram(&problem.stats), cfg.clone())?;
        s.run(hooks)?;
        Ok(s.finish())
    })
}

/// Continues a chain from a checkpoint to the end of its configured length.
pub fn resume_chain(problem: &Problem, ck: Checkpoint, workers: usize, hooks: &mut Hooks) -> Result<ChainOutput> {
    if ck.state.acc.sup != problem.sup {
        return Err(Error::Checkpoint("depth support differs from the checkpointed run".into()));
    }
    par::with_workers(workers, || {
        let mut s = Sampler::from_state(&problem.lib, DataView::Histogram(&problem.stats), ck.config, ck.state)?;
        s.run(hooks)?;
        Ok(s.finish())
    })
}
