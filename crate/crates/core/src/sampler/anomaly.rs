//! Anomaly-value updates: independent Metropolis-Hastings moves that
//! propose from the Gamma(α, ν) prior, so only the likelihood ratio enters.

use rand_distr::{Distribution, Gamma};

use crate::likelihood::reduced_term;
use crate::par;
use crate::rng::{site_rng, Stage};

/// Log acceptance ratio of moving `x` to `x_new` at a site with `ỹ = y`,
/// `M a = mix`, `g̃ = gt` and label `z`.
#[inline]
pub fn anomaly_log_ratio(y: f64, mix: f64, gt: f64, z: u8, x: f64, x_new: f64) -> f64 {
    if z == 0 {
        return 0.0;
    }
    reduced_term(y, mix + x_new, gt) - reduced_term(y, mix + x, gt)
}

/// Updates every `x`. Returns the number of accepted proposals.
#[allow(clippy::too_many_arguments)]
pub fn update_anomaly_values(
    x: &mut [f64],
    z: &[u8],
    y_tilde: &[f64],
    mix: &[f64],
    gt: &[f64],
    alpha: f64,
    nu: f64,
    seed: u64,
    sweep: u64,
) -> usize {
    let prior = Gamma::new(alpha, nu).expect("anomaly prior parameters are validated");
    let mut accepted = vec![0u8; x.len()];
    par::for_each_zip(x, 1, &mut accepted, 1, |k, xs, acc| {
        let mut rng = site_rng(seed, sweep, Stage::Anomaly, k as u64);
        let proposal: f64 = prior.sample(&mut rng);
        let u = rng.uniform_open0();
        let log_r = anomaly_log_ratio(y_tilde[k], mix[k], gt[k], z[k], xs[0], proposal);
        if proposal > 0.0 && (z[k] == 0 || u.ln() < log_r) {
            xs[0] = proposal;
            acc[0] = 1;
        }
    });
    accepted.iter().map(|&a| a as usize).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inactive_sites_always_move() {
        let mut x = vec![0.3; 50];
        let n = update_anomaly_values(&mut x, &[0; 50], &[4.0; 50], &[1.0; 50], &[2.0; 50], 1.0, 0.05, 1, 1);
        assert_eq!(n, 50);
        assert!(x.iter().all(|&v| v != 0.3));
    }

    #[test]
    fn empty_site_ratio() {
        let r = anomaly_log_ratio(0.0, 0.7, 3.0, 1, 0.2, 0.5);
        assert!((r - (-(0.5 - 0.2) * 3.0)).abs() < 1e-14);
    }
}
