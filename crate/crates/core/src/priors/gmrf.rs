//! Hidden gamma Markov random field on one abundance map.
//!
//! Abundances `a(i, j)` (an `n_row x n_col` grid) and auxiliaries `γ(gi, gj)`
//! (an `(n_row + 1) x (n_col + 1)` grid) form a bipartite graph: `a(i, j)`
//! touches `γ(i, j)`, `γ(i + 1, j)`, `γ(i, j + 1)` and `γ(i + 1, j + 1)`.
//! Auxiliaries on the rim miss some abundance neighbours; those slots hold
//! the pseudo-abundance [`BOUNDARY_ABUNDANCE`], so every `γ` has degree 4.

use crate::error::{Error, Result};
use crate::state::BOUNDARY_ABUNDANCE;

/// Harmonic-mean prior mean `ā = 4 / Σ 1/γ` of an abundance.
pub fn gmrf_abar(gamma: [f64; 4]) -> Result<f64> {
    if let Some(g) = gamma.iter().find(|g| !(**g > 0.0)) {
        return Err(Error::invalid(format!("auxiliary must be positive, got {g}")));
    }
    Ok(abar_unchecked(gamma))
}

#[inline]
fn abar_unchecked(gamma: [f64; 4]) -> f64 {
    4.0 / (1.0 / gamma[0] + 1.0 / gamma[1] + 1.0 / gamma[2] + 1.0 / gamma[3])
}

/// Arithmetic mean of the four abundance neighbours of an auxiliary.
#[inline]
pub fn gmrf_beta(a: [f64; 4]) -> f64 {
    (a[0] + a[1] + a[2] + a[3]) / 4.0
}

/// `ā` of abundance `(i, j)` from the auxiliary grid (`stride = n_col + 1`).
#[inline]
pub fn abar_at(gamma: &[f64], n_col: usize, i: usize, j: usize) -> f64 {
    let s = n_col + 1;
    let k = i * s + j;
    abar_unchecked([gamma[k], gamma[k + s], gamma[k + 1], gamma[k + s + 1]])
}

/// The four abundance neighbours of auxiliary `(gi, gj)`, with the
/// pseudo-abundance outside the image. `a_at` maps a pixel index to `a`.
#[inline]
pub fn neighbours_of_gamma(a_at: impl Fn(usize) -> f64, n_row: usize, n_col: usize, gi: usize, gj: usize) -> [f64; 4] {
    let at = |i: Option<usize>, j: Option<usize>| match (i, j) {
        (Some(i), Some(j)) if i < n_row && j < n_col => a_at(i * n_col + j),
        _ => BOUNDARY_ABUNDANCE,
    };
    let (im, jm) = (gi.checked_sub(1), gj.checked_sub(1));
    [at(im, jm), at(im, Some(gj)), at(Some(gi), jm), at(Some(gi), Some(gj))]
}

/// `β` of auxiliary `(gi, gj)`.
#[inline]
pub fn beta_at(a_at: impl Fn(usize) -> f64, n_row: usize, n_col: usize, gi: usize, gj: usize) -> f64 {
    gmrf_beta(neighbours_of_gamma(a_at, n_row, n_col, gi, gj))
}

/// Number of pseudo-abundance slots of auxiliary `(gi, gj)`.
#[inline]
pub fn pseudo_degree(n_row: usize, n_col: usize, gi: usize, gj: usize) -> usize {
    let rows = (gi >= 1) as usize + (gi < n_row) as usize;
    let cols = (gj >= 1) as usize + (gj < n_col) as usize;
    4 - rows * cols
}

fn check(a: &[f64], gamma: &[f64], n_row: usize, n_col: usize, c: f64) -> Result<()> {
    if a.len() != n_row * n_col || gamma.len() != (n_row + 1) * (n_col + 1) {
        return Err(Error::invalid("gamma-MRF field shapes do not match the grid"));
    }
    if !(c > 1.0) {
        return Err(Error::invalid(format!("gamma-MRF shape must exceed 1, got {c}")));
    }
    if a.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("abundances must be nonnegative"));
    }
    if gamma.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("auxiliaries must be positive"));
    }
    Ok(())
}

/// Edge sum `Σ_{(a, γ) ∈ ℰ} a / (4γ)` over real abundance-auxiliary edges.
fn edge_sum(a: &[f64], gamma: &[f64], n_col: usize) -> f64 {
    let s = n_col + 1;
    let mut acc = 0.0;
    for (p, &av) in a.iter().enumerate() {
        let k = (p / n_col) * s + p % n_col;
        acc += av / 4.0 * (1.0 / gamma[k] + 1.0 / gamma[k + 1] + 1.0 / gamma[k + s] + 1.0 / gamma[k + s + 1]);
    }
    acc
}

/// Edge sum over the pseudo-abundance slots of the rim auxiliaries.
fn boundary_edge_sum(gamma: &[f64], n_row: usize, n_col: usize) -> f64 {
    let s = n_col + 1;
    let mut acc = 0.0;
    for gi in 0..=n_row {
        for gj in 0..=n_col {
            let m = pseudo_degree(n_row, n_col, gi, gj);
            if m > 0 {
                acc += m as f64 * BOUNDARY_ABUNDANCE / (4.0 * gamma[gi * s + gj]);
            }
        }
    }
    acc
}

/// `(c − 1) Σ log a − (c + 1) Σ log γ − c Σ_ℰ a / (4γ)` over the real edges;
/// the normalising constant is omitted.
pub fn gmrf_joint_log_density(a: &[f64], gamma: &[f64], n_row: usize, n_col: usize, c: f64) -> Result<f64> {
    check(a, gamma, n_row, n_col, c)?;
    let sla: f64 = a.iter().map(|v| v.ln()).sum();
    let slg: f64 = gamma.iter().map(|v| v.ln()).sum();
    Ok((c - 1.0) * sla - (c + 1.0) * slg - c * edge_sum(a, gamma, n_col))
}

/// Contribution of the pseudo-abundance edges, `−c Σ 0.01 / (4γ)`. Added
/// to [`gmrf_joint_log_density`] it gives the density the sampler targets.
pub fn gmrf_boundary_log_density(gamma: &[f64], n_row: usize, n_col: usize, c: f64) -> f64 {
    -c * boundary_edge_sum(gamma, n_row, n_col)
}

/// `∂/∂c` of the full (real plus pseudo edge) log-density exponent:
/// `Σ log a − Σ log γ − Σ a / (4γ)`.
pub fn gmrf_c_score(a: &[f64], gamma: &[f64], n_row: usize, n_col: usize) -> f64 {
    let sla: f64 = a.iter().map(|v| v.ln()).sum();
    let slg: f64 = gamma.iter().map(|v| v.ln()).sum();
    sla - slg - edge_sum(a, gamma, n_col) - boundary_edge_sum(gamma, n_row, n_col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, Gamma};

    #[test]
    fn abar_examples() {
        assert_eq!(gmrf_abar([1.0; 4]).unwrap(), 1.0);
        assert!((gmrf_abar([1.0, 1.0, 2.0, 2.0]).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((gmrf_abar([0.37; 4]).unwrap() - 0.37).abs() < 1e-15);
        assert!(gmrf_abar([1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn beta_examples() {
        assert_eq!(gmrf_beta([1.0; 4]), 1.0);
        assert!((gmrf_beta([0.0, 0.0, 0.0, 0.4]) - 0.1).abs() < 1e-15);
        let corner = beta_at(|_| 0.01, 1, 1, 0, 0);
        assert!((corner - 0.01).abs() < 1e-15);
        assert_eq!(neighbours_of_gamma(|_| 0.5, 1, 1, 0, 0), [0.01, 0.01, 0.01, 0.5]);
    }

    #[test]
    fn degrees() {
        assert_eq!(pseudo_degree(1, 1, 0, 0), 3);
        assert_eq!(pseudo_degree(3, 3, 1, 2), 0);
        assert_eq!(pseudo_degree(3, 3, 0, 2), 2);
    }

    #[test]
    fn tiny_graph_density() {
        let v = gmrf_joint_log_density(&[1.0], &[1.0; 4], 1, 1, 2.0).unwrap();
        assert!((v + 2.0).abs() < 1e-15);
    }

    #[test]
    fn log_homogeneity() {
        let a = [0.3, 0.8, 1.1, 0.2, 0.5, 0.9];
        let g: Vec<f64> = (0..12).map(|k| 0.4 + 0.1 * k as f64).collect();
        let c = 3.5;
        let s: f64 = 1.7;
        let base = gmrf_joint_log_density(&a, &g, 2, 3, c).unwrap();
        let a2: Vec<f64> = a.iter().map(|v| v * s).collect();
        let g2: Vec<f64> = g.iter().map(|v| v * s).collect();
        let scaled = gmrf_joint_log_density(&a2, &g2, 2, 3, c).unwrap();
        let expected = (c - 1.0) * 6.0 * s.ln() - (c + 1.0) * 12.0 * s.ln();
        assert!((scaled - base - expected).abs() < 1e-12);
    }

    #[test]
    fn conditional_of_one_abundance_is_gamma() {
        let g = [0.6, 1.2, 0.9, 2.0];
        let c = 3.0;
        let abar = gmrf_abar(g).unwrap();
        let target = Gamma::new(c, c / abar).unwrap();
        // Normalise the joint along a on a fine grid and compare densities.
        let h = 1e-4;
        let grid: Vec<f64> = (1..200_000).map(|k| k as f64 * h).collect();
        let logs: Vec<f64> = grid.iter().map(|&a| gmrf_joint_log_density(&[a], &g, 1, 1, c).unwrap()).collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| (l - m).exp()).sum::<f64>() * h;
        for &k in &[2000usize, 5000, 12000, 30000] {
            let dens = (logs[k] - m).exp() / z;
            assert!((dens - target.pdf(grid[k])).abs() < 1e-4, "{dens} vs {}", target.pdf(grid[k]));
        }
    }

    #[test]
    fn score_is_the_c_derivative() {
        let a = [0.3, 0.8, 1.1, 0.2];
        let g: Vec<f64> = (0..9).map(|k| 0.4 + 0.2 * k as f64).collect();
        let full = |c: f64| gmrf_joint_log_density(&a, &g, 2, 2, c).unwrap() + gmrf_boundary_log_density(&g, 2, 2, c);
        let h = 1e-6;
        let fd = (full(2.0 + h) - full(2.0 - h)) / (2.0 * h);
        assert!((fd - gmrf_c_score(&a, &g, 2, 2)).abs() < 1e-6);
    }
}
