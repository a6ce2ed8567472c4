//! Prior densities and their local conditionals.

pub mod anomaly;
pub mod gmrf;
pub mod ising;
pub mod tv;

pub use anomaly::anomaly_value_log_prior;
pub use gmrf::{gmrf_abar, gmrf_beta, gmrf_boundary_log_density, gmrf_c_score, gmrf_joint_log_density};
pub use ising::{ising_local_log_odds, ising_suff_stats, IsingBeta, IsingStats};
pub use tv::{depth_conditional_log_prior, tv_potential};

/// 4-connected neighbours of `(i, j)`, truncated at the image border, in
/// the fixed order up, left, right, down.
#[inline]
pub fn four_neighbors(i: usize, j: usize, n_row: usize, n_col: usize) -> impl Iterator<Item = usize> {
    let up = (i > 0).then(|| (i - 1) * n_col + j);
    let left = (j > 0).then(|| i * n_col + j - 1);
    let right = (j + 1 < n_col).then(|| i * n_col + j + 1);
    let down = (i + 1 < n_row).then(|| (i + 1) * n_col + j);
    [up, left, right, down].into_iter().flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbourhood_is_symmetric_and_irreflexive() {
        let (nr, nc) = (4, 5);
        for p in 0..nr * nc {
            let (i, j) = (p / nc, p % nc);
            for q in four_neighbors(i, j, nr, nc) {
                assert_ne!(p, q);
                assert!(four_neighbors(q / nc, q % nc, nr, nc).any(|x| x == p));
            }
        }
        assert_eq!(four_neighbors(0, 0, nr, nc).count(), 2);
        assert_eq!(four_neighbors(1, 1, nr, nc).count(), 4);
        assert_eq!(four_neighbors(0, 0, 1, 1).count(), 0);
    }
}
