//! Companion chains that target the priors `f(T | ε)`, `f(Z | β')` and
//! `f(A_r, Γ_r | c_r)` on the same grid. Their states supply the prior
//! expectations in the hyperparameter gradient.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::depth::sample_depth_field;
use super::gamma::update_gamma_aux;
use super::labels::sample_label_field;
use crate::error::Result;
use crate::grid::DepthSupport;
use crate::par;
use crate::priors::gmrf::abar_at;
use crate::priors::ising::IsingBeta;
use crate::rng::{site_rng, Stage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxChains {
    pub t: Vec<usize>,
    pub z: Vec<u8>,
    pub a: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
}

/// Gibbs sweep of the gamma-MRF prior: `a | Γ ~ Gamma(c, ā / c)` for every
/// abundance, then `Γ | A`.
#[allow(clippy::too_many_arguments)]
pub fn gmrf_prior_sweep(a: &mut [f64], gamma: &mut [Vec<f64>], n_row: usize, n_col: usize, c: &[f64], seed: u64, sweep: u64) {
    let n_end = gamma.len();
    {
        let g: &[Vec<f64>] = gamma;
        par::for_each_chunk(a, n_end, |p, ap| {
            let (i, j) = (p / n_col, p % n_col);
            for (r, v) in ap.iter_mut().enumerate() {
                let abar = abar_at(&g[r], n_col, i, j);
                let dist = Gamma::new(c[r], abar / c[r]).expect("positive gamma-MRF parameters");
                let mut rng = site_rng(seed, sweep, Stage::AuxAbundance, (p * n_end + r) as u64);
                *v = dist.sample(&mut rng).max(f64::MIN_POSITIVE);
            }
        });
    }
    update_gamma_aux(gamma, a, n_row, n_col, c, seed, sweep, Stage::AuxGamma);
}

impl AuxChains {
    /// Advances every prior chain by one sweep. The depth chain only moves
    /// when the TV prior is in use.
    #[allow(clippy::too_many_arguments)]
    pub fn sweep(
        &mut self,
        n_row: usize,
        n_col: usize,
        n_band: usize,
        sup: &DepthSupport,
        eps: Option<f64>,
        beta: &IsingBeta,
        c: &[f64],
        seed: u64,
        sweep: u64,
    ) -> Result<()> {
        if let Some(eps) = eps {
            sample_depth_field(&mut self.t, n_row, n_col, sup, eps, true, |_, o| o.fill(0.0), seed, sweep, Stage::AuxDepth, None)?;
        }
        sample_label_field(&mut self.z, n_row, n_col, n_band, beta, |_, _| (0.0, 0.0), seed, sweep, Stage::AuxLabel);
        gmrf_prior_sweep(&mut self.a, &mut self.gamma, n_row, n_col, c, seed, sweep);
        Ok(())
    }
}
