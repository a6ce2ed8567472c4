//! Acquisition grid geometry and the admissible depth range.
//!
//! Spatial and spectral indices are 0-based throughout the API. Time bins
//! are 1-based (`1..=n_bin`), matching the text file formats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in millimetres per picosecond.
pub const LIGHT_MM_PER_PS: f64 = 0.299792458;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDims {
    pub n_row: usize,
    pub n_col: usize,
    pub n_band: usize,
    pub n_bin: usize,
    /// Width of one timing bin in picoseconds.
    pub bin_ps: f64,
}

impl GridDims {
    pub fn new(n_row: usize, n_col: usize, n_band: usize, n_bin: usize, bin_ps: f64) -> Result<Self> {
        if n_row == 0 || n_col == 0 || n_band == 0 || n_bin == 0 {
            return Err(Error::invalid(format!(
                "grid counts must be positive, got {n_row}x{n_col}x{n_band}x{n_bin}"
            )));
        }
        if !(bin_ps > 0.0 && bin_ps.is_finite()) {
            return Err(Error::invalid(format!("bin width must be positive, got {bin_ps} ps")));
        }
        Ok(Self { n_row, n_col, n_band, n_bin, bin_ps })
    }

    #[inline]
    pub fn n_pixels(&self) -> usize {
        self.n_row * self.n_col
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> usize {
        row * self.n_col + col
    }

    /// Two-way free-space range covered by one bin, in millimetres.
    #[inline]
    pub fn mm_per_bin(&self) -> f64 {
        self.bin_ps * LIGHT_MM_PER_PS / 2.0
    }
}

/// Converts a 1-based bin index into a range in millimetres relative to
/// `reference` (itself a bin index, `0..=n_bin`).
pub fn depth_bins_to_mm(t: usize, dims: &GridDims, reference: usize) -> Result<f64> {
    if t < 1 || t > dims.n_bin {
        return Err(Error::OutOfRange(format!("bin {t} outside 1..={}", dims.n_bin)));
    }
    if reference > dims.n_bin {
        return Err(Error::OutOfRange(format!("reference bin {reference} outside 0..={}", dims.n_bin)));
    }
    Ok((t as f64 - reference as f64) * dims.mm_per_bin())
}

/// Inclusive range of candidate depth bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthSupport {
    pub t_min: usize,
    pub t_max: usize,
}

impl DepthSupport {
    pub fn new(t_min: usize, t_max: usize, n_bin: usize) -> Result<Self> {
        let sup = Self { t_min, t_max };
        if !sup.fits(n_bin) {
            return Err(Error::invalid(format!(
                "empty depth support: [{t_min}, {t_max}] does not fit in 1..={n_bin}"
            )));
        }
        Ok(sup)
    }

    pub fn fits(&self, n_bin: usize) -> bool {
        1 <= self.t_min && self.t_min <= self.t_max && self.t_max <= n_bin
    }

    /// Margin rule used when no support is given: `T/10` bins on each side
    /// (301..T-300 at T = 3000), widened to hold the impulse-response tails.
    pub fn with_margin(n_bin: usize, irf_margin: usize) -> Result<Self> {
        let margin = ((n_bin as f64) / 10.0).round() as usize;
        let margin = margin.max(irf_margin);
        if 2 * margin >= n_bin {
            return Err(Error::invalid(format!(
                "empty depth support: margin {margin} leaves no bins in 1..={n_bin}"
            )));
        }
        Self::new(margin + 1, n_bin - margin, n_bin)
    }

    /// Number of candidate bins, `T'`.
    #[inline]
    pub fn len(&self) -> usize {
        self.t_max - self.t_min + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, t: usize) -> bool {
        (self.t_min..=self.t_max).contains(&t)
    }

    /// Position of bin `t` within the support.
    #[inline]
    pub fn index_of(&self, t: usize) -> usize {
        debug_assert!(self.contains(t));
        t - self.t_min
    }

    #[inline]
    pub fn bin_at(&self, k: usize) -> usize {
        self.t_min + k
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.t_min..=self.t_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(bin_ps: f64) -> GridDims {
        GridDims::new(1, 1, 1, 3000, bin_ps).unwrap()
    }

    #[test]
    fn one_bin_at_two_ps() {
        let d = depth_bins_to_mm(1, &dims(2.0), 0).unwrap();
        assert!((d - 0.299792458).abs() < 1e-12);
    }

    #[test]
    fn reference_equal_to_bin_is_zero() {
        assert_eq!(depth_bins_to_mm(731, &dims(2.0), 731).unwrap(), 0.0);
    }

    #[test]
    fn thousand_bins() {
        let d = depth_bins_to_mm(1000, &dims(2.0), 0).unwrap();
        assert!((d - 299.792458).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_bin() {
        assert!(depth_bins_to_mm(0, &dims(2.0), 0).is_err());
        assert!(depth_bins_to_mm(3001, &dims(2.0), 0).is_err());
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(GridDims::new(0, 1, 1, 1, 2.0).is_err());
        assert!(GridDims::new(1, 1, 1, 1, 0.0).is_err());
    }

    #[test]
    fn default_margin_at_3000_bins() {
        let sup = DepthSupport::with_margin(3000, 50).unwrap();
        assert_eq!((sup.t_min, sup.t_max), (301, 2700));
        assert_eq!(sup.len(), 2400);
    }

    #[test]
    fn irf_margin_dominates_short_histograms() {
        let sup = DepthSupport::with_margin(256, 80).unwrap();
        assert_eq!((sup.t_min, sup.t_max), (81, 176));
    }

    #[test]
    fn support_must_fit() {
        assert!(DepthSupport::new(301, 2700, 300).is_err());
        assert!(DepthSupport::new(5, 4, 300).is_err());
        assert!(DepthSupport::new(0, 4, 300).is_err());
    }
}
