use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Known spectral signatures `M` (`L x R`, row-major by band).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndmemberLibrary {
    n_band: usize,
    n_endmember: usize,
    m: Vec<f64>,
    names: Vec<String>,
    wavelengths_nm: Vec<f64>,
}

impl EndmemberLibrary {
    /// `m` is row-major: `m[l * R + r]`.
    pub fn new(n_band: usize, n_endmember: usize, m: Vec<f64>, names: Vec<String>, wavelengths_nm: Vec<f64>) -> Result<Self> {
        if n_band == 0 || n_endmember == 0 {
            return Err(Error::invalid("endmember library must have at least one band and one endmember"));
        }
        if m.len() != n_band * n_endmember {
            return Err(Error::invalid(format!(
                "endmember matrix has {} entries, expected {}x{}",
                m.len(),
                n_band,
                n_endmember
            )));
        }
        if names.len() != n_endmember {
            return Err(Error::invalid(format!("{} endmember names for {} columns", names.len(), n_endmember)));
        }
        if wavelengths_nm.len() != n_band {
            return Err(Error::invalid(format!("{} wavelengths for {} bands", wavelengths_nm.len(), n_band)));
        }
        if let Some((k, v)) = m.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!(
                "negative entry in endmember matrix at band {}, endmember {}: {v}",
                k / n_endmember,
                k % n_endmember
            )));
        }
        for r in 0..n_endmember {
            if (0..n_band).all(|l| m[l * n_endmember + r] == 0.0) {
                return Err(Error::invalid(format!("endmember '{}' is identically zero", names[r])));
            }
        }
        Ok(Self { n_band, n_endmember, m, names, wavelengths_nm })
    }

    /// Library with generated names `e1..eR` and wavelengths `1..L`.
    pub fn from_matrix(n_band: usize, n_endmember: usize, m: Vec<f64>) -> Result<Self> {
        let names = (1..=n_endmember).map(|r| format!("e{r}")).collect();
        let wl = (1..=n_band).map(|l| l as f64).collect();
        Self::new(n_band, n_endmember, m, names, wl)
    }

    #[inline]
    pub fn n_band(&self) -> usize {
        self.n_band
    }

    #[inline]
    pub fn n_endmember(&self) -> usize {
        self.n_endmember
    }

    #[inline]
    pub fn at(&self, l: usize, r: usize) -> f64 {
        self.m[l * self.n_endmember + r]
    }

    /// Row `l` of `M` (one value per endmember).
    #[inline]
    pub fn row(&self, l: usize) -> &[f64] {
        &self.m[l * self.n_endmember..(l + 1) * self.n_endmember]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.m
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    /// Writes `M a` into `out` (length `L`).
    #[inline]
    pub fn mix_into(&self, a: &[f64], out: &mut [f64]) {
        for (l, o) in out.iter_mut().enumerate() {
            *o = self.row(l).iter().zip(a).map(|(m, a)| m * a).sum();
        }
    }

    pub fn mix(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_band];
        self.mix_into(a, &mut out);
        out
    }
}
