//! Depth-free reduction to integrated counts.
//!
//! When `g̃_l` does not depend on the depth, the histograms enter the
//! likelihood only through `ỹ`, so the spectral unknowns can be inferred
//! from `ỹ ~ Poisson(g̃_l (M a + z x))` alone.

use serde::{Deserialize, Serialize};

use crate::cube::PhotonCube;
use crate::error::{Error, Result};
use crate::estimators::{anomaly_log_intensity, Accumulator};
use crate::library::EndmemberLibrary;
use crate::likelihood::{reduced_term, SuffStats};
use crate::par;
use crate::sampler::{ChainOutput, DataView, Hooks, Sampler, SamplerConfig};

/// Largest relative spread of `g̃_l` over the support for which the
/// reduction is accepted.
pub const REDUCTION_TOLERANCE: f64 = 1e-6;

/// Integrated counts, `[pixel][band]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratedCounts {
    pub n_row: usize,
    pub n_col: usize,
    pub n_band: usize,
    pub y: Vec<f64>,
}

impl IntegratedCounts {
    /// Photons per pixel over all bands.
    pub fn pixel_totals(&self) -> Vec<f64> {
        self.y.chunks(self.n_band).map(|c| c.iter().sum()).collect()
    }
}

pub fn integrate_cube(cube: &PhotonCube) -> IntegratedCounts {
    let d = cube.dims();
    IntegratedCounts { n_row: d.n_row, n_col: d.n_col, n_band: d.n_band, y: cube.totals().iter().map(|&v| v as f64).collect() }
}

/// Whether every `g̃_l` is constant over the support, and the largest
/// relative variation found.
pub fn check_reduction_validity(stats: &SuffStats) -> (bool, f64) {
    let v = (0..stats.n_band()).map(|l| stats.g_tilde_variation(l)).fold(0.0, f64::max);
    (v <= REDUCTION_TOLERANCE, v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedObservation {
    pub counts: IntegratedCounts,
    /// Per-band constant `g̃_l`.
    pub g_tilde: Vec<f64>,
    pub valid: bool,
    pub variation: f64,
}

pub fn reduce(stats: &SuffStats) -> ReducedObservation {
    let d = *stats.dims();
    let (valid, variation) = check_reduction_validity(stats);
    let t0 = stats.support().t_min;
    ReducedObservation {
        counts: IntegratedCounts { n_row: d.n_row, n_col: d.n_col, n_band: d.n_band, y: stats.y_tilde().to_vec() },
        g_tilde: (0..d.n_band).map(|l| stats.g_tilde(0, l, t0)).collect(),
        valid,
        variation,
    }
}

/// Library with row `l` scaled by `g̃_l`.
pub fn scaled_library(lib: &EndmemberLibrary, g_tilde: &[f64]) -> Result<EndmemberLibrary> {
    let (l_n, r_n) = (lib.n_band(), lib.n_endmember());
    let m = (0..l_n * r_n).map(|k| lib.matrix()[k] * g_tilde[k / r_n]).collect();
    EndmemberLibrary::new(l_n, r_n, m, lib.names().to_vec(), lib.wavelengths_nm().to_vec())
}

/// `Σ ỹ log λ − λ g̃` over all pixels and bands, `λ` laid out `[pixel][band]`.
pub fn reduced_log_lik(obs: &ReducedObservation, lambda: &[f64]) -> f64 {
    let l = obs.counts.n_band;
    let n_col = obs.counts.n_col;
    par::ordered_sum(obs.counts.n_row, |i| {
        let mut acc = 0.0;
        let range = i * n_col * l..(i + 1) * n_col * l;
        for (k, (&y, &lam)) in range.clone().zip(obs.counts.y[range.clone()].iter().zip(&lambda[range])) {
            acc += reduced_term(y, lam, obs.g_tilde[k % l]);
        }
        acc
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaEstimates {
    pub abundances: Vec<f64>,
    pub labels: Vec<u8>,
    pub anomalies: Vec<f64>,
    pub anomaly_log_intensity: Vec<f64>,
}

impl PfaEstimates {
    pub fn from_accumulator(acc: &Accumulator) -> Result<Self> {
        let abundances = acc.abundances()?;
        let labels = acc.labels()?;
        let anomalies = acc.anomalies(&labels);
        let anomaly_log_intensity = anomaly_log_intensity(&anomalies, acc.n_band);
        Ok(Self { abundances, labels, anomalies, anomaly_log_intensity })
    }
}

/// Runs the abundance, auxiliary, label and anomaly kernels on the
/// integrated counts. An invalid reduction is refused unless `force`.
pub fn pfa_unmix(obs: &ReducedObservation, lib: &EndmemberLibrary, cfg: &SamplerConfig, force: bool) -> Result<(PfaEstimates, ChainOutput)> {
    if !obs.valid && !force {
        return Err(Error::invalid(format!(
            "g̃ varies by {:.3e} over the depth support; the integrated model does not apply",
            obs.variation
        )));
    }
    if lib.n_band() != obs.counts.n_band {
        return Err(Error::invalid("library and counts differ in band count"));
    }
    let mut cfg = cfg.clone();
    cfg.kernels.depth = false;
    cfg.tv = false;
    let out = par::with_workers(cfg.workers, || {
        let view = DataView::Integrated {
            y_tilde: &obs.counts.y,
            g_tilde: &obs.g_tilde,
            n_row: obs.counts.n_row,
            n_col: obs.counts.n_col,
        };
        let mut s = Sampler::new(lib, view, cfg)?;
        s.run(&mut Hooks::default())?;
        Ok::<_, Error>(s.finish())
    })?;
    Ok((PfaEstimates::from_accumulator(&out.acc)?, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Entry;
    use crate::grid::{DepthSupport, GridDims};
    use crate::irf::{BandResponse, ImpulseResponseSet};
    use crate::likelihood::build_suff_stats;

    #[test]
    fn single_count_integrates_to_one() {
        let dims = GridDims::new(1, 2, 1, 10, 2.0).unwrap();
        let cube = PhotonCube::from_entries(dims, [Entry { row: 0, col: 1, band: 0, bin: 7, count: 1 }]).unwrap();
        assert_eq!(integrate_cube(&cube).y, vec![0.0, 1.0]);
        assert_eq!(integrate_cube(&PhotonCube::empty(dims)).y, vec![0.0, 0.0]);
    }

    #[test]
    fn validity_tracks_truncation() {
        let dims = GridDims::new(1, 1, 1, 100, 2.0).unwrap();
        let cube = PhotonCube::empty(dims);
        let irf = ImpulseResponseSet::new(100, vec![BandResponse::Gaussian { eta: 1.0, mu: 0.0, sigma: 3.0, delay: 0.0 }]).unwrap();
        let inside = build_suff_stats(&cube, &irf, DepthSupport::new(20, 80, 100).unwrap());
        assert!(check_reduction_validity(&inside).0);
        let edge = build_suff_stats(&cube, &irf, DepthSupport::new(1, 80, 100).unwrap());
        let (ok, v) = check_reduction_validity(&edge);
        assert!(!ok);
        let k = irf.kernel(0);
        let direct = 1.0 - k.windowed_sum(1, 100) / k.area();
        assert!((v - direct).abs() < 1e-12, "{v} vs {direct}");
    }
}
