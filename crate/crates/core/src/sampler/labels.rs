//! Anomaly-label updates under the Ising prior. Sites are coloured by the
//! parity of `i + j + l`, which separates every spatial and spectral
//! neighbour pair, so each colour is drawn in parallel.

use crate::likelihood::reduced_term;
use crate::par;
use crate::priors::ising::{local_weights, neighbour_counts, IsingBeta};
use crate::rng::{site_rng, Stage};

/// Colour of label site `(i, j, l)`.
#[inline]
pub fn label_colour(i: usize, j: usize, l: usize) -> usize {
    (i + j + l) % 2
}

/// Draws every label from its conditional. `lik(p, l)` returns the
/// likelihood log-weights of `z = 0` and `z = 1` at the site.
#[allow(clippy::too_many_arguments)]
pub fn sample_label_field<F>(
    z: &mut [u8],
    n_row: usize,
    n_col: usize,
    n_band: usize,
    beta: &IsingBeta,
    lik: F,
    seed: u64,
    sweep: u64,
    stage: Stage,
) where
    F: Fn(usize, usize) -> (f64, f64) + Sync + Send,
{
    for colour in 0..2 {
        let prev = z.to_vec();
        par::for_each_chunk(z, n_band, |p, zp| {
            let (i, j) = (p / n_col, p % n_col);
            for (l, zl) in zp.iter_mut().enumerate() {
                if label_colour(i, j, l) != colour {
                    continue;
                }
                let (on, dn, ol, dl) = neighbour_counts(&prev, p, l, n_row, n_col, n_band);
                let (w0, w1) = local_weights(on, dn, ol, dl, beta);
                let (l0, l1) = lik(p, l);
                let d = (w1 + l1) - (w0 + l0);
                let p1 = if d.is_nan() {
                    0.0
                } else if d > 0.0 {
                    1.0 / (1.0 + (-d).exp())
                } else {
                    let e = d.exp();
                    e / (1.0 + e)
                };
                let u = site_rng(seed, sweep, stage, (p * n_band + l) as u64).uniform();
                *zl = (u < p1) as u8;
            }
        });
    }
}

/// Label update of the main chain. `mix` is `M a` and `gt` is `g̃` at the
/// current depths, both `[pixel][band]`.
#[allow(clippy::too_many_arguments)]
pub fn update_labels(
    z: &mut [u8],
    x: &[f64],
    y_tilde: &[f64],
    mix: &[f64],
    gt: &[f64],
    n_row: usize,
    n_col: usize,
    n_band: usize,
    beta: &IsingBeta,
    seed: u64,
    sweep: u64,
) {
    sample_label_field(
        z,
        n_row,
        n_col,
        n_band,
        beta,
        |p, l| {
            let k = p * n_band + l;
            (reduced_term(y_tilde[k], mix[k], gt[k]), reduced_term(y_tilde[k], mix[k] + x[k], gt[k]))
        },
        seed,
        sweep,
        Stage::Label,
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colouring_separates_neighbours() {
        let (nr, nc, nl) = (3, 4, 5);
        for i in 0..nr {
            for j in 0..nc {
                for l in 0..nl {
                    let c = label_colour(i, j, l);
                    if i + 1 < nr {
                        assert_ne!(c, label_colour(i + 1, j, l));
                    }
                    if j + 1 < nc {
                        assert_ne!(c, label_colour(i, j + 1, l));
                    }
                    if l + 1 < nl {
                        assert_ne!(c, label_colour(i, j, l + 1));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_coupling_fair_prior_is_bernoulli_half() {
        let b = IsingBeta { n: 0.0, l: 0.0, zero: 0.5 };
        let mut z = vec![0u8; 4 * 4 * 3];
        let mut ones = 0usize;
        let sweeps = 2000;
        for s in 0..sweeps {
            sample_label_field(&mut z, 4, 4, 3, &b, |_, _| (0.0, 0.0), 3, s, Stage::AuxLabel);
            ones += z.iter().map(|&v| v as usize).sum::<usize>();
        }
        let f = ones as f64 / (sweeps as usize * z.len()) as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }
}
