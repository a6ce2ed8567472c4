//! Depth updates: exact draws from the discrete conditional on the support,
//! one checkerboard colour at a time when the TV prior couples neighbours.

use crate::error::{Error, Result};
use crate::grid::DepthSupport;
use crate::likelihood::SuffStats;
use crate::par;
use crate::priors::tv::{depth_conditional_log_prior, neighbor_depths};
use crate::rng::{site_rng, Stage};

const DEGENERATE: usize = usize::MAX;

/// Turns log-weights into unnormalised weights in place and draws an index
/// by inverse CDF with `u ∈ [0, 1)`. Returns `None` when every weight is
/// zero. The weights are left as `exp(w − max)`; their sum is returned too.
pub fn sample_log_weights(w: &mut [f64], u: f64) -> Option<(usize, f64)> {
    let m = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return None;
    }
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = (*v - m).exp();
        total += *v;
    }
    let target = u * total;
    let mut cum = 0.0;
    let mut last = 0;
    for (k, &v) in w.iter().enumerate() {
        if v > 0.0 {
            cum += v;
            last = k;
            if cum > target {
                return Some((k, total));
            }
        }
    }
    Some((last, total))
}

/// Draws every depth of `t` from `∝ exp(loglik(p, ·) + log-prior)`.
///
/// `loglik(p, out)` fills the depth-dependent log-likelihood of pixel `p`
/// over the support. With `tv` set (and `eps > 0`) the two checkerboard
/// colours are visited in turn, each reading the other colour's current
/// depths; otherwise all pixels are independent. When `rb` is given, the
/// normalised conditional of every pixel is added to its row (`[p][k]`).
#[allow(clippy::too_many_arguments)]
pub fn sample_depth_field<F>(
    t: &mut [usize],
    n_row: usize,
    n_col: usize,
    sup: &DepthSupport,
    eps: f64,
    tv: bool,
    loglik: F,
    seed: u64,
    sweep: u64,
    stage: Stage,
    mut rb: Option<&mut [f64]>,
) -> Result<()>
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let t_len = sup.len();
    let coupled = tv && eps > 0.0;
    let phases: &[Option<usize>] = if coupled { &[Some(0), Some(1)] } else { &[None] };
    for &phase in phases {
        let prev = if coupled { t.to_vec() } else { Vec::new() };
        let visit = |p: usize, slot: &mut usize, acc: Option<&mut [f64]>| {
            let (i, j) = (p / n_col, p % n_col);
            if let Some(c) = phase {
                if (i + j) % 2 != c {
                    return;
                }
            }
            let mut w = vec![0.0; t_len];
            loglik(p, &mut w);
            if coupled {
                let mut nb = Vec::with_capacity(4);
                neighbor_depths(&prev, p, n_row, n_col, &mut nb);
                for (k, v) in w.iter_mut().enumerate() {
                    *v += depth_conditional_log_prior(sup.bin_at(k), &nb, eps);
                }
            }
            let u = site_rng(seed, sweep, stage, p as u64).uniform();
            match sample_log_weights(&mut w, u) {
                Some((k, total)) => {
                    *slot = sup.bin_at(k);
                    if let Some(acc) = acc {
                        for (a, v) in acc.iter_mut().zip(&w) {
                            *a += v / total;
                        }
                    }
                }
                None => *slot = DEGENERATE,
            }
        };
        match rb.as_deref_mut() {
            Some(acc) => par::for_each_zip(t, 1, acc, t_len, |p, s, a| visit(p, &mut s[0], Some(a))),
            None => par::for_each_chunk(t, 1, |p, s| visit(p, &mut s[0], None)),
        }
        if let Some(p) = t.iter().position(|&v| v == DEGENERATE) {
            return Err(Error::DegenerateConditional { sweep: sweep as usize, pixel: p });
        }
    }
    Ok(())
}

/// Depth update of the main chain. `lambda` holds the current spectra
/// `M a + z x`, laid out `[pixel][band]`.
#[allow(clippy::too_many_arguments)]
pub fn update_depths(
    stats: &SuffStats,
    t: &mut [usize],
    lambda: &[f64],
    eps: f64,
    tv: bool,
    seed: u64,
    sweep: u64,
    rb: Option<&mut [f64]>,
) -> Result<()> {
    let dims = *stats.dims();
    let l = dims.n_band;
    sample_depth_field(
        t,
        dims.n_row,
        dims.n_col,
        stats.support(),
        eps,
        tv,
        |p, out| stats.depth_log_lik_into(p, &lambda[p * l..(p + 1) * l], out),
        seed,
        sweep,
        Stage::Depth,
        rb,
    )
}

/// Normalised conditional of pixel `p` over the support given its spectrum
/// and the depths of its neighbours.
pub fn depth_conditional(stats: &SuffStats, p: usize, lambda: &[f64], neighbours: &[usize], eps: f64) -> Vec<f64> {
    let sup = stats.support();
    let mut w = vec![0.0; sup.len()];
    stats.depth_log_lik_into(p, lambda, &mut w);
    for (k, v) in w.iter_mut().enumerate() {
        *v += depth_conditional_log_prior(sup.bin_at(k), neighbours, eps);
    }
    let m = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = w.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
