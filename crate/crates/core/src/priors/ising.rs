//! Ising model on the anomaly labels,
//! `f(Z | β') ∝ exp(β_N φ_N + β_L φ_L + β_0 n_0 + (1 − β_0) n_1)`.
//!
//! Spatial neighbours are 4-connected within a band; spectral neighbours
//! are the adjacent bands of the same pixel. Agreement counts run over
//! ordered pairs, so each agreeing edge adds 2.

use serde::{Deserialize, Serialize};

use super::four_neighbors;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingBeta {
    pub n: f64,
    pub l: f64,
    pub zero: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IsingStats {
    pub phi_l: f64,
    pub phi_n: f64,
    pub n_zero: f64,
    pub n_one: f64,
}

impl IsingStats {
    /// Unnormalised log-prior `β_N φ_N + β_L φ_L + β_0 n_0 + (1 − β_0) n_1`.
    pub fn log_weight(&self, b: &IsingBeta) -> f64 {
        b.n * self.phi_n + b.l * self.phi_l + b.zero * self.n_zero + (1.0 - b.zero) * self.n_one
    }
}

/// Sufficient statistics of a label cube laid out `z[(i * n_col + j) * L + l]`.
pub fn ising_suff_stats(z: &[u8], n_row: usize, n_col: usize, n_band: usize) -> IsingStats {
    let mut spatial = 0u64;
    let mut spectral = 0u64;
    let mut ones = 0u64;
    for i in 0..n_row {
        for j in 0..n_col {
            let p = i * n_col + j;
            for l in 0..n_band {
                let v = z[p * n_band + l];
                ones += v as u64;
                if j + 1 < n_col && z[(p + 1) * n_band + l] == v {
                    spatial += 1;
                }
                if i + 1 < n_row && z[(p + n_col) * n_band + l] == v {
                    spatial += 1;
                }
                if l + 1 < n_band && z[p * n_band + l + 1] == v {
                    spectral += 1;
                }
            }
        }
    }
    let total = (n_row * n_col * n_band) as u64;
    IsingStats {
        phi_l: 2.0 * spectral as f64,
        phi_n: 2.0 * spatial as f64,
        n_zero: (total - ones) as f64,
        n_one: ones as f64,
    }
}

/// Counts of spatial and spectral neighbours of site `(p, l)` carrying
/// label 1, together with the neighbour totals: `(ones_n, deg_n, ones_l, deg_l)`.
#[inline]
pub fn neighbour_counts(z: &[u8], p: usize, l: usize, n_row: usize, n_col: usize, n_band: usize) -> (u32, u32, u32, u32) {
    let (mut on, mut dn) = (0u32, 0u32);
    for q in four_neighbors(p / n_col, p % n_col, n_row, n_col) {
        on += z[q * n_band + l] as u32;
        dn += 1;
    }
    let (mut ol, mut dl) = (0u32, 0u32);
    if l > 0 {
        ol += z[p * n_band + l - 1] as u32;
        dl += 1;
    }
    if l + 1 < n_band {
        ol += z[p * n_band + l + 1] as u32;
        dl += 1;
    }
    (on, dn, ol, dl)
}

/// Site-local log-weights `(w_0, w_1)` of the two label values:
/// `w_k = 2 β_N A_N(k) + 2 β_L A_L(k) + [β_0 if k = 0 else 1 − β_0]`,
/// with `A(k)` the number of neighbours carrying label `k`.
pub fn ising_local_log_odds(z: &[u8], p: usize, l: usize, n_row: usize, n_col: usize, n_band: usize, b: &IsingBeta) -> (f64, f64) {
    let (on, dn, ol, dl) = neighbour_counts(z, p, l, n_row, n_col, n_band);
    local_weights(on, dn, ol, dl, b)
}

#[inline]
pub(crate) fn local_weights(on: u32, dn: u32, ol: u32, dl: u32, b: &IsingBeta) -> (f64, f64) {
    let w0 = 2.0 * b.n * (dn - on) as f64 + 2.0 * b.l * (dl - ol) as f64 + b.zero;
    let w1 = 2.0 * b.n * on as f64 + 2.0 * b.l * ol as f64 + (1.0 - b.zero);
    (w0, w1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_cube() {
        let s = ising_suff_stats(&[0; 8], 2, 2, 2);
        assert_eq!(s, IsingStats { phi_l: 8.0, phi_n: 16.0, n_zero: 8.0, n_one: 0.0 });
    }

    #[test]
    fn flipping_one_site_removes_its_agreements() {
        let mut z = vec![0u8; 3 * 3 * 2];
        let before = ising_suff_stats(&z, 3, 3, 2);
        z[4 * 2 + 1] = 1;
        let after = ising_suff_stats(&z, 3, 3, 2);
        assert_eq!(before.phi_n - after.phi_n, 2.0 * 4.0);
        assert_eq!(before.phi_l - after.phi_l, 2.0);
    }

    #[test]
    fn spatial_checkerboard_has_no_spatial_agreement() {
        let (nr, nc, nl) = (3, 4, 3);
        let z: Vec<u8> = (0..nr * nc * nl).map(|k| (((k / nl) / nc + (k / nl) % nc) % 2) as u8).collect();
        let s = ising_suff_stats(&z, nr, nc, nl);
        assert_eq!(s.phi_n, 0.0);
        assert_eq!(s.phi_l, (2 * nr * nc * (nl - 1)) as f64);
    }

    #[test]
    fn isolated_fair_site() {
        let b = IsingBeta { n: 0.7, l: 1.3, zero: 0.5 };
        let (w0, w1) = ising_local_log_odds(&[0], 0, 0, 1, 1, 1, &b);
        assert_eq!(w0, w1);
    }

    #[test]
    fn interior_site_with_zero_neighbours() {
        let b = IsingBeta { n: 1.0, l: 1.0, zero: 0.9 };
        let z = vec![0u8; 3 * 3 * 3];
        let (w0, w1) = ising_local_log_odds(&z, 4, 1, 3, 3, 3, &b);
        let degree = 6.0;
        assert!((w0 - w1 - (2.0 * degree + 0.8)).abs() < 1e-12);
    }

    #[test]
    fn local_odds_match_enumeration() {
        let b = IsingBeta { n: 0.4, l: 0.9, zero: 0.7 };
        let weight = |z: &[u8]| ising_suff_stats(z, 1, 1, 2).log_weight(&b).exp();
        for other in 0..2u8 {
            let p0 = weight(&[0, other]);
            let p1 = weight(&[1, other]);
            let (w0, w1) = ising_local_log_odds(&[0, other], 0, 0, 1, 1, 2, &b);
            let local = (w1 - w0).exp() / (1.0 + (w1 - w0).exp());
            assert!((p1 / (p0 + p1) - local).abs() < 1e-14);
        }
    }
}
