//! `key = value` run configuration. Blank lines and `#` comments are
//! ignored; unknown keys are an error.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_err, read_text};
use crate::error::Result;
use crate::estimators::DepthEstimator;
use crate::sampler::SamplerConfig;

/// Every accepted key with its default and meaning.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("iters", "5000", "total sweeps"),
    ("burnin", "2000", "burn-in sweeps"),
    ("thin", "1", "keep every n-th post-burn-in sweep"),
    ("seed", "0", "random seed"),
    ("tv", "false", "total-variation depth prior"),
    ("alpha", "1", "anomaly-value prior shape"),
    ("nu", "0.05", "anomaly-value prior scale"),
    ("eps", "0.1", "initial TV weight"),
    ("beta_n", "0.3", "initial spatial Ising coupling"),
    ("beta_l", "0.3", "initial spectral Ising coupling"),
    ("beta_0", "0.9", "initial Ising bias toward z = 0"),
    ("c", "5", "initial gamma-MRF shape"),
    ("adapt_theta", "true", "adapt the MRF hyperparameters during burn-in"),
    ("leapfrog", "10", "HMC leapfrog steps"),
    ("hmc_step", "0.05", "initial HMC step size"),
    ("target_accept", "0.75", "HMC acceptance target during burn-in"),
    ("sapg_decay", "0.8", "exponent of the hyperparameter step schedule"),
    ("first_step_fraction", "0.05", "relative size of the first hyperparameter step"),
    ("average_fraction", "0", "trailing fraction of burn-in averaged into the final hyperparameters"),
    ("store_samples", "false", "keep every post-burn-in state"),
    ("depth_estimator", "rao-blackwell", "rao-blackwell or histogram"),
    ("workers", "0", "worker threads, 0 for all cores"),
    ("checkpoint_every", "0", "write a checkpoint every n sweeps, 0 to disable"),
    ("cube", "", "photon cube file"),
    ("endmembers", "", "endmember CSV"),
    ("irf", "", "impulse-response file"),
    ("delays", "", "optional per-pixel delay map"),
    ("out", "out", "output directory"),
    ("t_min", "", "first depth bin of the support, default from the margin rule"),
    ("t_max", "", "last depth bin of the support"),
    ("budget", "1", "mean photons per pixel and band for simulation"),
    ("n_row", "64", "simulated rows"),
    ("n_col", "64", "simulated columns"),
    ("n_band", "8", "simulated bands"),
    ("n_endmember", "4", "simulated endmembers"),
    ("n_bin", "160", "simulated histogram length"),
    ("bin_ps", "2", "bin width in picoseconds"),
    ("fwhm_ps", "20", "simulated response width"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sampler: SamplerConfig,
    pub checkpoint_every: usize,
    pub cube: Option<PathBuf>,
    pub endmembers: Option<PathBuf>,
    pub irf: Option<PathBuf>,
    pub delays: Option<PathBuf>,
    pub out: PathBuf,
    pub t_min: Option<usize>,
    pub t_max: Option<usize>,
    pub budget: f64,
    pub n_row: usize,
    pub n_col: usize,
    pub n_band: usize,
    pub n_endmember: usize,
    pub n_bin: usize,
    pub bin_ps: f64,
    pub fwhm_ps: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig { tv: false, ..SamplerConfig::default() },
            checkpoint_every: 0,
            cube: None,
            endmembers: None,
            irf: None,
            delays: None,
            out: PathBuf::from("out"),
            t_min: None,
            t_max: None,
            budget: 1.0,
            n_row: 64,
            n_col: 64,
            n_band: 8,
            n_endmember: 4,
            n_bin: 160,
            bin_ps: 2.0,
            fwhm_ps: 20.0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("{key}: cannot parse {v:?}"))
}

fn flag(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got {v:?}")),
    }
}

impl RunConfig {
    /// Sets one key; used for both files and command-line overrides.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let s = &mut self.sampler;
        match key {
            "iters" => s.n_mc = num(key, v)?,
            "burnin" => s.n_bi = num(key, v)?,
            "thin" => s.thin = num(key, v)?,
            "seed" => s.seed = num(key, v)?,
            "tv" => s.tv = flag(key, v)?,
            "alpha" => s.initial.alpha = num(key, v)?,
            "nu" => s.initial.nu = num(key, v)?,
            "eps" => s.initial.eps = num(key, v)?,
            "beta_n" => s.initial.beta_n = num(key, v)?,
            "beta_l" => s.initial.beta_l = num(key, v)?,
            "beta_0" => s.initial.beta_0 = num(key, v)?,
            "c" => s.initial.c = num(key, v)?,
            "adapt_theta" => s.adapt_theta = flag(key, v)?,
            "leapfrog" => s.hmc.n_leapfrog = num(key, v)?,
            "hmc_step" => s.hmc.initial_step = num(key, v)?,
            "target_accept" => s.hmc.target_accept = num(key, v)?,
            "sapg_decay" => s.sapg.decay = num(key, v)?,
            "first_step_fraction" => s.sapg.first_step_fraction = num(key, v)?,
            "average_fraction" => s.sapg.average_fraction = num(key, v)?,
            "store_samples" => s.store_samples = flag(key, v)?,
            "depth_estimator" => {
                s.depth_estimator = match v {
                    "rao-blackwell" => DepthEstimator::RaoBlackwell,
                    "histogram" => DepthEstimator::Histogram,
                    _ => return Err(format!("{key}: expected rao-blackwell or histogram, got {v:?}")),
                }
            }
            "workers" => s.workers = num(key, v)?,
            "checkpoint_every" => self.checkpoint_every = num(key, v)?,
            "cube" => self.cube = Some(PathBuf::from(v)),
            "endmembers" => self.endmembers = Some(PathBuf::from(v)),
            "irf" => self.irf = Some(PathBuf::from(v)),
            "delays" => self.delays = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "t_min" => self.t_min = Some(num(key, v)?),
            "t_max" => self.t_max = Some(num(key, v)?),
            "budget" => self.budget = num(key, v)?,
            "n_row" => self.n_row = num(key, v)?,
            "n_col" => self.n_col = num(key, v)?,
            "n_band" => self.n_band = num(key, v)?,
            "n_endmember" => self.n_endmember = num(key, v)?,
            "n_bin" => self.n_bin = num(key, v)?,
            "bin_ps" => self.bin_ps = num(key, v)?,
            "fwhm_ps" => self.fwhm_ps = num(key, v)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}

pub fn parse_config(text: &str, path: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| parse_err(path, k + 1, "expected key = value"))?;
        cfg.set(key.trim(), value.trim()).map_err(|m| parse_err(path, k + 1, m))?;
    }
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    parse_config(&read_text(path)?, &path.display().to_string())
}
