//! Poisson observation model and its sufficient statistics.
//!
//! For a pixel `p` with depth `t0` the log-likelihood factors per band as
//! `ỹ log λ − λ g̃(t0) + Σ_t y log g(t − t0) − Σ_t log y!`. The first two
//! terms drive every spectral update; the third is the depth-dependent
//! look-up table; the last is a constant that is dropped unless asked for.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::cube::PhotonCube;
use crate::error::{Error, Result};
use crate::grid::{DepthSupport, GridDims};
use crate::irf::ImpulseResponseSet;
use crate::library::EndmemberLibrary;
use crate::par;
use crate::state::SceneState;

/// `log P(k; λ) = k log λ − λ − log k!`, with `log P(0; 0) = 0` and
/// `log P(k > 0; 0) = −∞`.
pub fn poisson_log_pmf(k: i64, lambda: f64) -> Result<f64> {
    if k < 0 {
        return Err(Error::invalid(format!("negative count {k}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("negative or undefined Poisson mean {lambda}")));
    }
    Ok(poisson_log_pmf_unchecked(k as u64, lambda))
}

#[inline]
pub(crate) fn poisson_log_pmf_unchecked(k: u64, lambda: f64) -> f64 {
    if k == 0 {
        return -lambda;
    }
    if lambda == 0.0 {
        return f64::NEG_INFINITY;
    }
    k as f64 * lambda.ln() - lambda - ln_factorial(k)
}

/// `ỹ log λ − λ g̃` with `0 log 0 = 0`.
#[inline]
pub fn reduced_term(y: f64, lambda: f64, g_tilde: f64) -> f64 {
    if y == 0.0 {
        -lambda * g_tilde
    } else if lambda <= 0.0 {
        f64::NEG_INFINITY
    } else {
        y * lambda.ln() - lambda * g_tilde
    }
}

/// `Σ_l [ỹ_l log λ_l − λ_l g̃_l + lgy_l]`, where `g̃` and `lgy` (the
/// `Σ_t y log g` table) are already evaluated at the depth of interest.
/// The `Σ log y!` constant is not included.
pub fn pixel_log_lik(y_tilde: &[f64], g_tilde: &[f64], log_g_dot_y: &[f64], lambda: &[f64]) -> f64 {
    let mut acc = 0.0;
    for l in 0..lambda.len() {
        acc += reduced_term(y_tilde[l], lambda[l], g_tilde[l]) + log_g_dot_y[l];
    }
    acc
}

/// Gradient of `Σ_l ỹ_l log λ_l − λ_l g̃_l` in the abundances, with
/// `λ = M a + r`.
pub fn grad_log_lik_abundance(y_tilde: &[f64], g_tilde: &[f64], lib: &EndmemberLibrary, a: &[f64], r: &[f64]) -> Vec<f64> {
    let mut lambda = lib.mix(a);
    for (lam, rr) in lambda.iter_mut().zip(r) {
        *lam += rr;
    }
    let mut grad = vec![0.0; lib.n_endmember()];
    for l in 0..lib.n_band() {
        let w = if y_tilde[l] == 0.0 { 0.0 } else { y_tilde[l] / lambda[l] } - g_tilde[l];
        for (g, m) in grad.iter_mut().zip(lib.row(l)) {
            *g += w * m;
        }
    }
    grad
}

/// Gradient of the same term in the anomaly values: `z_l (ỹ_l / λ_l − g̃_l)`.
pub fn grad_log_lik_anomaly(y_tilde: &[f64], g_tilde: &[f64], lambda: &[f64], z: &[u8]) -> Vec<f64> {
    (0..lambda.len())
        .map(|l| {
            if z[l] == 0 {
                0.0
            } else {
                let ratio = if y_tilde[l] == 0.0 { 0.0 } else { y_tilde[l] / lambda[l] };
                ratio - g_tilde[l]
            }
        })
        .collect()
}

/// Look-up tables that make every likelihood evaluation independent of `T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuffStats {
    dims: GridDims,
    sup: DepthSupport,
    y_tilde: Vec<f64>,
    delays: Option<Vec<i64>>,
    shift_lo: i64,
    shift_len: usize,
    /// `g̃_l(s) = Σ_t g_l(t − s)` for shifts `s = t0 + d`, `[band][shift]`.
    g_tilde: Vec<f64>,
    g_tilde_flat: Vec<bool>,
    g_tilde_variation: Vec<f64>,
    /// `Σ_l Σ_t y log g_l(t − t0 − d)`, `[pixel][t0 − t_min]`.
    depth_base: Vec<f64>,
    log_factorial: f64,
}

/// Builds `ỹ`, the `g̃` table and the band-summed `Σ_t y log g` table.
pub fn build_suff_stats(cube: &PhotonCube, irf: &ImpulseResponseSet, sup: DepthSupport) -> SuffStats {
    let dims = *cube.dims();
    let (d_min, d_max) = irf.delay_range();
    let shift_lo = sup.t_min as i64 + d_min;
    let shift_len = (sup.t_max as i64 + d_max - shift_lo + 1) as usize;
    let n_band = dims.n_band;

    let mut g_tilde = Vec::with_capacity(n_band * shift_len);
    let mut flat = Vec::with_capacity(n_band);
    let mut variation = Vec::with_capacity(n_band);
    for l in 0..n_band {
        let k = irf.kernel(l);
        let row: Vec<f64> = (0..shift_len).map(|s| k.windowed_sum(shift_lo + s as i64, dims.n_bin)).collect();
        let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
        flat.push(hi == lo);
        variation.push(if hi > 0.0 { (hi - lo) / hi } else { f64::INFINITY });
        g_tilde.extend(row);
    }

    let t_len = sup.len();
    let mut depth_base = vec![0.0; dims.n_pixels() * t_len];
    par::for_each_chunk(&mut depth_base, t_len, |p, out| {
        let mut band = vec![0.0; t_len];
        for l in 0..n_band {
            band_log_profile_into(cube, irf, &sup, p, l, &mut band);
            for (o, b) in out.iter_mut().zip(&band) {
                *o += b;
            }
        }
    });

    SuffStats {
        dims,
        sup,
        y_tilde: cube.totals().iter().map(|&y| y as f64).collect(),
        delays: irf.delays().map(|d| d.to_vec()),
        shift_lo,
        shift_len,
        g_tilde,
        g_tilde_flat: flat,
        g_tilde_variation: variation,
        depth_base,
        log_factorial: cube.log_factorial_sum(),
    }
}

/// `Σ_t y[p,l,t] log g_l(t − t0 − d_p)` for every `t0` in the support.
/// A photon the response cannot reach from `t0` makes that entry `−∞`.
pub fn band_log_profile_into(
    cube: &PhotonCube,
    irf: &ImpulseResponseSet,
    sup: &DepthSupport,
    p: usize,
    l: usize,
    out: &mut [f64],
) {
    out.fill(0.0);
    let (bins, counts) = cube.histogram(p, l);
    if bins.is_empty() {
        return;
    }
    let kernel = irf.kernel(l);
    let log_k: Vec<f64> = kernel.values.iter().map(|g| g.ln()).collect();
    let d = irf.delay(p);
    for (&t, &y) in bins.iter().zip(counts) {
        let y = y as f64;
        for (k, o) in out.iter_mut().enumerate() {
            let lag = t as i64 - sup.bin_at(k) as i64 - d - kernel.first_lag;
            *o += if lag < 0 || lag >= log_k.len() as i64 { f64::NEG_INFINITY } else { y * log_k[lag as usize] };
        }
    }
}

pub fn band_log_profile(cube: &PhotonCube, irf: &ImpulseResponseSet, sup: &DepthSupport, p: usize, l: usize) -> Vec<f64> {
    let mut out = vec![0.0; sup.len()];
    band_log_profile_into(cube, irf, sup, p, l, &mut out);
    out
}

impl SuffStats {
    #[inline]
    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    #[inline]
    pub fn support(&self) -> &DepthSupport {
        &self.sup
    }

    #[inline]
    pub fn n_band(&self) -> usize {
        self.dims.n_band
    }

    /// `ỹ`, laid out `[pixel][band]`.
    #[inline]
    pub fn y_tilde(&self) -> &[f64] {
        &self.y_tilde
    }

    #[inline]
    pub fn y_tilde_pixel(&self, p: usize) -> &[f64] {
        let l = self.dims.n_band;
        &self.y_tilde[p * l..(p + 1) * l]
    }

    #[inline]
    pub fn delay(&self, p: usize) -> i64 {
        self.delays.as_ref().map_or(0, |d| d[p])
    }

    /// Row of `g̃_l` indexed by `t0 − t_min`, for a pixel delay `d`.
    #[inline]
    pub fn g_tilde_row(&self, l: usize, d: i64) -> &[f64] {
        let start = (self.sup.t_min as i64 + d - self.shift_lo) as usize;
        let base = l * self.shift_len;
        &self.g_tilde[base + start..base + start + self.sup.len()]
    }

    /// `g̃_l(t0)` at pixel `p`.
    #[inline]
    pub fn g_tilde(&self, p: usize, l: usize, t0: usize) -> f64 {
        let s = (t0 as i64 + self.delay(p) - self.shift_lo) as usize;
        self.g_tilde[l * self.shift_len + s]
    }

    /// `g̃` of every band at pixel `p` and depth `t0`.
    pub fn g_tilde_pixel_into(&self, p: usize, t0: usize, out: &mut [f64]) {
        for (l, o) in out.iter_mut().enumerate() {
            *o = self.g_tilde(p, l, t0);
        }
    }

    /// True when `g̃_l` takes one value over all reachable shifts.
    #[inline]
    pub fn g_tilde_is_flat(&self, l: usize) -> bool {
        self.g_tilde_flat[l]
    }

    /// Relative spread `(max − min) / max` of `g̃_l` over reachable shifts.
    pub fn g_tilde_variation(&self, l: usize) -> f64 {
        self.g_tilde_variation[l]
    }

    /// Band-summed `Σ_t y log g` for pixel `p`, indexed by `t0 − t_min`.
    #[inline]
    pub fn depth_base(&self, p: usize) -> &[f64] {
        let n = self.sup.len();
        &self.depth_base[p * n..(p + 1) * n]
    }

    /// `Σ log y!` over the cube.
    pub fn log_factorial(&self) -> f64 {
        self.log_factorial
    }

    /// Depth-dependent log-likelihood of pixel `p` for every `t0`:
    /// `Σ_l [lgy_l(t0) − λ_l g̃_l(t0)]`, written into `out`.
    pub fn depth_log_lik_into(&self, p: usize, lambda: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.depth_base(p));
        let d = self.delay(p);
        for (l, &lam) in lambda.iter().enumerate() {
            if lam == 0.0 || self.g_tilde_flat[l] {
                continue;
            }
            for (o, g) in out.iter_mut().zip(self.g_tilde_row(l, d)) {
                *o -= lam * g;
            }
        }
    }

    /// Log-likelihood of pixel `p` at spectrum `λ` and depth `t0`, with the
    /// band-summed table. Excludes `Σ log y!`.
    pub fn pixel_log_lik(&self, p: usize, lambda: &[f64], t0: usize) -> f64 {
        let k = self.sup.index_of(t0);
        let y = self.y_tilde_pixel(p);
        let mut acc = self.depth_base(p)[k];
        for (l, &lam) in lambda.iter().enumerate() {
            acc += reduced_term(y[l], lam, self.g_tilde(p, l, t0));
        }
        acc
    }

    /// `Σ_p` pixel log-likelihoods; `with_constant` subtracts `Σ log y!`.
    pub fn joint_log_lik(&self, state: &SceneState, lib: &EndmemberLibrary, with_constant: bool) -> f64 {
        let n_row = self.dims.n_row;
        let n_col = self.dims.n_col;
        let rows = par::map_range(n_row, |i| {
            let mut lam = vec![0.0; self.dims.n_band];
            let mut acc = 0.0;
            for j in 0..n_col {
                let p = i * n_col + j;
                state.spectrum_into(p, lib, &mut lam);
                acc += self.pixel_log_lik(p, &lam, state.t[p]);
            }
            acc
        });
        let total: f64 = rows.into_iter().sum();
        if with_constant {
            total - self.log_factorial
        } else {
            total
        }
    }
}

/// Direct evaluation of `Σ_l Σ_t log P(y[p,l,t]; λ_l g_l(t − t0 − d))`,
/// including the `log y!` terms.
pub fn direct_pixel_log_lik(cube: &PhotonCube, irf: &ImpulseResponseSet, p: usize, lambda: &[f64], t0: usize) -> f64 {
    let dims = cube.dims();
    let d = irf.delay(p);
    let mut acc = 0.0;
    for (l, &lam) in lambda.iter().enumerate() {
        for t in 1..=dims.n_bin {
            let y = cube.get(p / dims.n_col, p % dims.n_col, l, t);
            acc += poisson_log_pmf_unchecked(u64::from(y), lam * irf.value(l, t, t0, d));
        }
    }
    acc
}
