//! Total-variation Markov random field on the depth map,
//! `f(T | ε) ∝ exp(−ε φ(T))`.

use super::four_neighbors;

/// `φ(T) = Σ_p Σ_{q ∈ V(p)} |t_p − t_q|` over ordered neighbour pairs, so
/// every edge contributes twice.
pub fn tv_potential(t: &[usize], n_row: usize, n_col: usize) -> f64 {
    let mut edges = 0u64;
    for i in 0..n_row {
        for j in 0..n_col {
            let p = i * n_col + j;
            if j + 1 < n_col {
                edges += t[p].abs_diff(t[p + 1]) as u64;
            }
            if i + 1 < n_row {
                edges += t[p].abs_diff(t[p + n_col]) as u64;
            }
        }
    }
    2.0 * edges as f64
}

/// Site-local part of `log f(T | ε)` as a function of `t`:
/// `−2ε Σ_{q ∈ V(p)} |t − t_q|`. The factor 2 is the two ordered pairs
/// each edge contributes to `φ`.
#[inline]
pub fn depth_conditional_log_prior(t: usize, neighbors: &[usize], eps: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    let s: usize = neighbors.iter().map(|&q| t.abs_diff(q)).sum();
    -2.0 * eps * s as f64
}

/// Depths of the 4-connected neighbours of pixel `p`.
pub fn neighbor_depths(t: &[usize], p: usize, n_row: usize, n_col: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend(four_neighbors(p / n_col, p % n_col, n_row, n_col).map(|q| t[q]));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_potentials() {
        assert_eq!(tv_potential(&[7; 6], 2, 3), 0.0);
        assert_eq!(tv_potential(&[1, 2, 1, 2], 2, 2), 4.0);
        assert_eq!(tv_potential(&[40, 45], 1, 2), 10.0);
    }

    #[test]
    fn conditional_peaks_at_consensus() {
        let nb = [5, 5, 5, 5];
        assert_eq!(depth_conditional_log_prior(5, &nb, 0.3), 0.0);
        for t in [1, 4, 6, 9] {
            assert!(depth_conditional_log_prior(t, &nb, 0.3) < 0.0);
        }
        assert_eq!(depth_conditional_log_prior(9, &nb, 0.0), 0.0);
    }

    #[test]
    fn local_conditional_equals_global_on_pair() {
        // Brute-force normalisation of exp(−ε φ) over the second site.
        let eps = 0.5;
        let support: Vec<usize> = (3..=9).collect();
        let t1 = 5;
        let global: Vec<f64> = support.iter().map(|&t2| (-eps * tv_potential(&[t1, t2], 1, 2)).exp()).collect();
        let local: Vec<f64> = support.iter().map(|&t2| depth_conditional_log_prior(t2, &[t1], eps).exp()).collect();
        let (zg, zl): (f64, f64) = (global.iter().sum(), local.iter().sum());
        for (g, l) in global.iter().zip(&local) {
            assert!((g / zg - l / zl).abs() < 1e-15);
        }
        assert!((local[3] / local[4] - 1.0f64.exp()).abs() < 1e-12);
    }
}
