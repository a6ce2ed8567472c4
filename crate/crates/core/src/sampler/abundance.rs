//! Abundance updates by constrained Hamiltonian Monte Carlo.
//!
//! Each pixel's abundance vector is moved along a leapfrog trajectory of
//! `U(a) = −[Σ_l ỹ_l log λ_l − λ_l g̃_l + Σ_r (c_r − 1) log a_r − c_r a_r / ā_r]`
//! with unit mass. A coordinate that crosses zero is reflected back and its
//! momentum negated, which keeps the trajectory in the positive orthant
//! while preserving reversibility and volume.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::library::EndmemberLibrary;
use crate::likelihood::reduced_term;
use crate::par;
use crate::priors::gmrf::abar_at;
use crate::rng::{site_rng, SiteRng, Stage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmcConfig {
    pub n_leapfrog: usize,
    /// The step is multiplied by a uniform draw in `[1 − jitter, 1 + jitter]`.
    pub jitter: f64,
    pub target_accept: f64,
    pub initial_step: f64,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self { n_leapfrog: 10, jitter: 0.2, target_accept: 0.75, initial_step: 0.05 }
    }
}

/// Per-pixel integrator state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HmcSlot {
    pub step: f64,
    /// Acceptance probability of the last proposal.
    pub accept: f64,
}

/// Conditional target of one pixel's abundances.
pub struct PixelTarget<'a> {
    pub lib: &'a EndmemberLibrary,
    pub y: &'a [f64],
    pub gt: &'a [f64],
    /// Active anomalies `z x` per band.
    pub r: &'a [f64],
    pub c: &'a [f64],
    pub abar: &'a [f64],
}

impl PixelTarget<'_> {
    fn lambda(&self, a: &[f64], l: usize) -> f64 {
        self.lib.row(l).iter().zip(a).map(|(m, a)| m * a).sum::<f64>() + self.r[l]
    }

    /// `U(a)`; `+∞` outside the open orthant.
    pub fn potential(&self, a: &[f64]) -> f64 {
        if a.iter().any(|&v| !(v > 0.0)) {
            return f64::INFINITY;
        }
        let mut ll = 0.0;
        for l in 0..self.y.len() {
            ll += reduced_term(self.y[l], self.lambda(a, l), self.gt[l]);
        }
        for (r, &ar) in a.iter().enumerate() {
            ll += (self.c[r] - 1.0) * ar.ln() - self.c[r] * ar / self.abar[r];
        }
        -ll
    }

    /// `∇U(a)` written into `out`.
    pub fn grad(&self, a: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = -((self.c[r] - 1.0) / a[r] - self.c[r] / self.abar[r]);
        }
        for l in 0..self.y.len() {
            let lam = self.lambda(a, l);
            let w = if self.y[l] == 0.0 { 0.0 } else { self.y[l] / lam } - self.gt[l];
            for (o, m) in out.iter_mut().zip(self.lib.row(l)) {
                *o -= w * m;
            }
        }
    }
}

/// One HMC transition of `a` with step `h` and `n_steps` leapfrog steps.
/// Returns the acceptance probability and whether the move was taken.
pub fn hmc_transition(target: &PixelTarget, a: &mut [f64], h: f64, n_steps: usize, rng: &mut SiteRng) -> (f64, bool) {
    let n = a.len();
    let mut mom: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let u = rng.uniform_open0();
    if n_steps == 0 {
        return (1.0, true);
    }
    let h0 = target.potential(a) + 0.5 * mom.iter().map(|p| p * p).sum::<f64>();
    let mut q = a.to_vec();
    let mut g = vec![0.0; n];
    target.grad(&q, &mut g);
    for (p, gr) in mom.iter_mut().zip(&g) {
        *p -= 0.5 * h * gr;
    }
    for s in 0..n_steps {
        for r in 0..n {
            q[r] += h * mom[r];
            if q[r] < 0.0 {
                q[r] = -q[r];
                mom[r] = -mom[r];
            }
        }
        if q.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return (0.0, false);
        }
        target.grad(&q, &mut g);
        let scale = if s + 1 == n_steps { 0.5 * h } else { h };
        for (p, gr) in mom.iter_mut().zip(&g) {
            *p -= scale * gr;
        }
    }
    let h1 = target.potential(&q) + 0.5 * mom.iter().map(|p| p * p).sum::<f64>();
    let log_acc = h0 - h1;
    if !log_acc.is_finite() {
        return (0.0, false);
    }
    let prob = log_acc.min(0.0).exp();
    if u.ln() < log_acc {
        a.copy_from_slice(&q);
        (prob, true)
    } else {
        (prob, false)
    }
}

/// Fields the abundance update reads besides the abundances themselves.
pub struct AbundanceInputs<'a> {
    pub lib: &'a EndmemberLibrary,
    pub y_tilde: &'a [f64],
    pub gt: &'a [f64],
    pub z: &'a [u8],
    pub x: &'a [f64],
    pub gamma: &'a [Vec<f64>],
    pub c: &'a [f64],
    pub n_col: usize,
}

/// Updates every pixel's abundances and refreshes `mix = M a`. With
/// `adapt_rate` set, each pixel's step moves on the log scale toward the
/// target acceptance. Returns the mean acceptance probability.
#[allow(clippy::too_many_arguments)]
pub fn update_abundances(
    inp: &AbundanceInputs,
    a: &mut [f64],
    mix: &mut [f64],
    slots: &mut [HmcSlot],
    cfg: &HmcConfig,
    adapt_rate: Option<f64>,
    seed: u64,
    sweep: u64,
) -> f64 {
    let n_end = inp.lib.n_endmember();
    let n_band = inp.lib.n_band();
    par::for_each_zip3(a, n_end, mix, n_band, slots, 1, |p, ap, mp, slot| {
        let (i, j) = (p / inp.n_col, p % inp.n_col);
        let abar: Vec<f64> = inp.gamma.iter().map(|g| abar_at(g, inp.n_col, i, j)).collect();
        let r: Vec<f64> = (0..n_band)
            .map(|l| {
                let k = p * n_band + l;
                if inp.z[k] == 1 {
                    inp.x[k]
                } else {
                    0.0
                }
            })
            .collect();
        let target = PixelTarget {
            lib: inp.lib,
            y: &inp.y_tilde[p * n_band..(p + 1) * n_band],
            gt: &inp.gt[p * n_band..(p + 1) * n_band],
            r: &r,
            c: inp.c,
            abar: &abar,
        };
        let mut rng = site_rng(seed, sweep, Stage::Abundance, p as u64);
        let jitter = 1.0 + cfg.jitter * (2.0 * rng.uniform() - 1.0);
        let (prob, _) = hmc_transition(&target, ap, slot[0].step * jitter, cfg.n_leapfrog, &mut rng);
        slot[0].accept = prob;
        if let Some(rate) = adapt_rate {
            let s = slot[0].step * (rate * (prob - cfg.target_accept)).exp();
            slot[0].step = s.clamp(1e-6, 10.0);
        }
        inp.lib.mix_into(ap, mp);
    });
    slots.iter().map(|s| s.accept).sum::<f64>() / slots.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (EndmemberLibrary, Vec<f64>, Vec<f64>) {
        let lib = EndmemberLibrary::from_matrix(3, 2, vec![1.0, 0.2, 0.5, 0.5, 0.1, 0.9]).unwrap();
        (lib, vec![3.0, 0.0, 5.0], vec![2.0, 2.5, 3.0])
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (lib, y, gt) = toy();
        let r = [0.0, 0.3, 0.0];
        let t = PixelTarget { lib: &lib, y: &y, gt: &gt, r: &r, c: &[2.5, 4.0], abar: &[0.8, 1.4] };
        let a = [0.7, 1.1];
        let mut g = [0.0; 2];
        t.grad(&a, &mut g);
        for k in 0..2 {
            let h = 1e-6;
            let mut ap = a;
            let mut am = a;
            ap[k] += h;
            am[k] -= h;
            let fd = (t.potential(&ap) - t.potential(&am)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6 * fd.abs().max(1.0), "{fd} vs {}", g[k]);
        }
    }

    #[test]
    fn zero_steps_is_identity() {
        let (lib, y, gt) = toy();
        let t = PixelTarget { lib: &lib, y: &y, gt: &gt, r: &[0.0; 3], c: &[2.0, 2.0], abar: &[1.0, 1.0] };
        let mut a = [0.4, 0.9];
        let mut rng = site_rng(1, 1, Stage::Abundance, 0);
        assert_eq!(hmc_transition(&t, &mut a, 0.1, 0, &mut rng), (1.0, true));
        assert_eq!(a, [0.4, 0.9]);
    }

    #[test]
    fn tiny_steps_conserve_energy() {
        let (lib, y, gt) = toy();
        let t = PixelTarget { lib: &lib, y: &y, gt: &gt, r: &[0.0; 3], c: &[2.0, 3.0], abar: &[1.0, 0.6] };
        for s in 0..20 {
            let mut a = [0.5 + 0.05 * s as f64, 1.0];
            let mut rng = site_rng(7, s, Stage::Abundance, 0);
            let (prob, _) = hmc_transition(&t, &mut a, 1e-4, 10, &mut rng);
            // |ΔH| < 1e-6 implies an acceptance probability above 1 − 1e-6.
            assert!(prob > 1.0 - 1e-6, "{prob}");
        }
    }
}
