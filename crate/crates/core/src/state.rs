//! One MCMC state and the hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::library::EndmemberLibrary;

/// Value every abundance outside the image is pinned to in the gamma-MRF.
pub const BOUNDARY_ABUNDANCE: f64 = 0.01;

/// Scene unknowns. Layouts: `t[p]`, `a[p * R + r]`, `z[p * L + l]`,
/// `x[p * L + l]`, `gamma[r][gi * (n_col + 1) + gj]` with `p = i * n_col + j`.
///
/// Abundance `(i, j)` is linked to the four auxiliaries at `(i, j)`,
/// `(i + 1, j)`, `(i, j + 1)` and `(i + 1, j + 1)` of its endmember's
/// `(n_row + 1) x (n_col + 1)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub n_row: usize,
    pub n_col: usize,
    pub n_band: usize,
    pub n_endmember: usize,
    pub t: Vec<usize>,
    pub a: Vec<f64>,
    pub z: Vec<u8>,
    pub x: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
}

impl SceneState {
    /// State with every depth at `t0`, abundances `a0`, labels off,
    /// anomaly values `x0` and auxiliaries `g0`.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(n_row: usize, n_col: usize, n_band: usize, n_endmember: usize, t0: usize, a0: f64, x0: f64, g0: f64) -> Self {
        let n = n_row * n_col;
        Self {
            n_row,
            n_col,
            n_band,
            n_endmember,
            t: vec![t0; n],
            a: vec![a0; n * n_endmember],
            z: vec![0; n * n_band],
            x: vec![x0; n * n_band],
            gamma: vec![vec![g0; (n_row + 1) * (n_col + 1)]; n_endmember],
        }
    }

    #[inline]
    pub fn n_pixels(&self) -> usize {
        self.n_row * self.n_col
    }

    #[inline]
    pub fn abundances(&self, p: usize) -> &[f64] {
        &self.a[p * self.n_endmember..(p + 1) * self.n_endmember]
    }

    /// `r = z * x` at `(p, l)`.
    #[inline]
    pub fn anomaly(&self, p: usize, l: usize) -> f64 {
        let k = p * self.n_band + l;
        if self.z[k] == 1 {
            self.x[k]
        } else {
            0.0
        }
    }

    /// `λ = M a + z x` for pixel `p`, written into `out` (length `L`).
    pub fn spectrum_into(&self, p: usize, lib: &EndmemberLibrary, out: &mut [f64]) {
        lib.mix_into(self.abundances(p), out);
        for (l, o) in out.iter_mut().enumerate() {
            *o += self.anomaly(p, l);
        }
    }

    pub fn spectrum(&self, p: usize, lib: &EndmemberLibrary) -> Vec<f64> {
        let mut out = vec![0.0; self.n_band];
        self.spectrum_into(p, lib, &mut out);
        out
    }

    /// Auxiliary grid width, `n_col + 1`.
    #[inline]
    pub fn gamma_stride(&self) -> usize {
        self.n_col + 1
    }

    /// Checks shapes and domains; `sup` bounds the depth values.
    pub fn check(&self, t_min: usize, t_max: usize) -> Result<()> {
        let n = self.n_pixels();
        let shapes = [
            ("t", self.t.len(), n),
            ("a", self.a.len(), n * self.n_endmember),
            ("z", self.z.len(), n * self.n_band),
            ("x", self.x.len(), n * self.n_band),
        ];
        for (what, got, want) in shapes {
            if got != want {
                return Err(Error::invalid(format!("state field {what} has {got} entries, expected {want}")));
            }
        }
        if self.gamma.len() != self.n_endmember
            || self.gamma.iter().any(|g| g.len() != (self.n_row + 1) * (self.n_col + 1))
        {
            return Err(Error::invalid("auxiliary field has the wrong shape"));
        }
        if let Some(t) = self.t.iter().find(|t| !(t_min..=t_max).contains(*t)) {
            return Err(Error::OutOfRange(format!("depth {t} outside [{t_min}, {t_max}]")));
        }
        if self.a.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::invalid("abundances must be finite and nonnegative"));
        }
        if self.x.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::invalid("anomaly values must be finite and positive"));
        }
        if self.z.iter().any(|z| *z > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        if self.gamma.iter().flatten().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("auxiliaries must be finite and positive"));
        }
        Ok(())
    }
}

/// Fixed anomaly-value prior `(α, ν)` and adapted MRF parameters `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub alpha: f64,
    pub nu: f64,
    pub eps: f64,
    pub beta_n: f64,
    pub beta_l: f64,
    pub beta_0: f64,
    pub c: Vec<f64>,
}

impl HyperParams {
    pub fn new(alpha: f64, nu: f64, eps: f64, beta_n: f64, beta_l: f64, beta_0: f64, c: Vec<f64>) -> Result<Self> {
        let h = Self { alpha, nu, eps, beta_n, beta_l, beta_0, c };
        h.check()?;
        Ok(h)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.nu > 0.0) {
            return Err(Error::invalid(format!("alpha and nu must be positive, got ({}, {})", self.alpha, self.nu)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(format!("eps must be nonnegative, got {}", self.eps)));
        }
        if !(self.beta_n > 0.0 && self.beta_l > 0.0) {
            return Err(Error::invalid("beta_n and beta_l must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta_0) {
            return Err(Error::invalid(format!("beta_0 must lie in [0, 1], got {}", self.beta_0)));
        }
        if let Some(c) = self.c.iter().find(|c| !(**c > 1.0 && c.is_finite())) {
            return Err(Error::invalid(format!("gamma-MRF shape must exceed 1, got {c}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_adds_active_anomalies_only() {
        let lib = EndmemberLibrary::from_matrix(2, 1, vec![1.0, 2.0]).unwrap();
        let mut s = SceneState::uniform(1, 1, 2, 1, 5, 0.5, 0.3, 1.0);
        assert_eq!(s.spectrum(0, &lib), vec![0.5, 1.0]);
        s.z[1] = 1;
        assert_eq!(s.spectrum(0, &lib), vec![0.5, 1.3]);
        assert!(s.check(1, 10).is_ok());
        assert!(s.check(6, 10).is_err());
    }

    #[test]
    fn hyperparameter_domains() {
        assert!(HyperParams::new(1.0, 0.05, 0.0, 1.0, 1.0, 0.5, vec![2.0]).is_ok());
        assert!(HyperParams::new(1.0, 0.05, 0.0, 1.0, 1.0, 1.5, vec![2.0]).is_err());
        assert!(HyperParams::new(1.0, 0.05, 0.0, 1.0, 1.0, 0.5, vec![1.0]).is_err());
    }
}
