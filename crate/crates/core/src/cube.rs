//! Sparse photon-count histograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridDims;

/// One nonzero histogram entry. Spatial and band indices are 0-based,
/// the time bin is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub band: usize,
    pub bin: usize,
    pub count: u32,
}

/// Photon counts `y[i,j,l,t]`, stored as one sorted sparse histogram per
/// (pixel, band) with the integrated count `ỹ` cached alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonCube {
    dims: GridDims,
    /// `offsets[p * L + l]..offsets[p * L + l + 1]` indexes `bins`/`counts`.
    offsets: Vec<usize>,
    bins: Vec<u32>,
    counts: Vec<u32>,
    totals: Vec<u64>,
}

impl PhotonCube {
    pub fn empty(dims: GridDims) -> Self {
        let n = dims.n_pixels() * dims.n_band;
        Self { dims, offsets: vec![0; n + 1], bins: Vec::new(), counts: Vec::new(), totals: vec![0; n] }
    }

    /// Builds a cube from entries in any order. Duplicate coordinates are
    /// summed and zero counts dropped.
    pub fn from_entries(dims: GridDims, entries: impl IntoIterator<Item = Entry>) -> Result<Self> {
        let n_l = dims.n_band;
        let mut keyed: Vec<(usize, u32, u32)> = Vec::new();
        for e in entries {
            if e.row >= dims.n_row || e.col >= dims.n_col || e.band >= n_l || e.bin < 1 || e.bin > dims.n_bin {
                return Err(Error::OutOfRange(format!(
                    "entry ({}, {}, {}, {}) outside {}x{}x{}x{}",
                    e.row, e.col, e.band, e.bin, dims.n_row, dims.n_col, n_l, dims.n_bin
                )));
            }
            if e.count > 0 {
                keyed.push((dims.pixel(e.row, e.col) * n_l + e.band, e.bin as u32, e.count));
            }
        }
        keyed.sort_unstable_by_key(|&(k, t, _)| (k, t));
        let n = dims.n_pixels() * n_l;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut bins = Vec::with_capacity(keyed.len());
        let mut counts: Vec<u32> = Vec::with_capacity(keyed.len());
        let mut totals = vec![0u64; n];
        let mut cursor = 0;
        for (key, total) in totals.iter_mut().enumerate() {
            offsets.push(bins.len());
            let start = bins.len();
            while cursor < keyed.len() && keyed[cursor].0 == key {
                let (_, t, c) = keyed[cursor];
                if bins.len() > start && *bins.last().unwrap() == t {
                    let last = counts.last_mut().unwrap();
                    *last = last.checked_add(c).ok_or_else(|| Error::invalid("photon count overflows u32"))?;
                } else {
                    bins.push(t);
                    counts.push(c);
                }
                *total += u64::from(c);
                cursor += 1;
            }
        }
        offsets.push(bins.len());
        Ok(Self { dims, offsets, bins, counts, totals })
    }

    /// Builds a cube from a dense `[pixel][band][bin]` array of length
    /// `N * L * T`.
    pub fn from_dense(dims: GridDims, dense: &[u32]) -> Result<Self> {
        let t_len = dims.n_bin;
        let expected = dims.n_pixels() * dims.n_band * t_len;
        if dense.len() != expected {
            return Err(Error::invalid(format!("dense cube has {} values, expected {expected}", dense.len())));
        }
        let entries = dense.chunks(t_len).enumerate().flat_map(|(key, hist)| {
            let p = key / dims.n_band;
            let band = key % dims.n_band;
            hist.iter().enumerate().filter(|(_, &c)| c > 0).map(move |(k, &count)| Entry {
                row: p / dims.n_col,
                col: p % dims.n_col,
                band,
                bin: k + 1,
                count,
            })
        });
        Self::from_entries(dims, entries)
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let t_len = self.dims.n_bin;
        let mut out = vec![0u32; self.totals.len() * t_len];
        for key in 0..self.totals.len() {
            let (bins, counts) = self.slot(key);
            for (&t, &c) in bins.iter().zip(counts) {
                out[key * t_len + t as usize - 1] = c;
            }
        }
        out
    }

    #[inline]
    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    #[inline]
    fn slot(&self, key: usize) -> (&[u32], &[u32]) {
        let r = self.offsets[key]..self.offsets[key + 1];
        (&self.bins[r.clone()], &self.counts[r])
    }

    /// Sparse histogram of pixel `p` in band `l`: sorted 1-based bins and
    /// their counts.
    #[inline]
    pub fn histogram(&self, p: usize, l: usize) -> (&[u32], &[u32]) {
        self.slot(p * self.dims.n_band + l)
    }

    /// Integrated count `ỹ` of pixel `p` in band `l`.
    #[inline]
    pub fn y_tilde(&self, p: usize, l: usize) -> u64 {
        self.totals[p * self.dims.n_band + l]
    }

    /// All `ỹ` values, laid out `[pixel][band]`.
    #[inline]
    pub fn totals(&self) -> &[u64] {
        &self.totals
    }

    pub fn get(&self, row: usize, col: usize, band: usize, bin: usize) -> u32 {
        let (bins, counts) = self.histogram(self.dims.pixel(row, col), band);
        match bins.binary_search(&(bin as u32)) {
            Ok(k) => counts[k],
            Err(_) => 0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.bins.len()
    }

    pub fn total_photons(&self) -> u64 {
        self.totals.iter().sum()
    }

    /// Mean photons per pixel per band.
    pub fn mean_photons(&self) -> f64 {
        self.total_photons() as f64 / self.totals.len() as f64
    }

    /// Fraction of (pixel, band) histograms with no detection.
    pub fn empty_fraction(&self) -> f64 {
        self.totals.iter().filter(|&&y| y == 0).count() as f64 / self.totals.len() as f64
    }

    /// Fraction of pixels with no detection in any band.
    pub fn empty_pixel_fraction(&self) -> f64 {
        let l = self.dims.n_band;
        let empty = self.totals.chunks(l).filter(|c| c.iter().all(|&y| y == 0)).count();
        empty as f64 / self.dims.n_pixels() as f64
    }

    /// `Σ log y!` over every entry.
    pub fn log_factorial_sum(&self) -> f64 {
        self.counts.iter().map(|&c| statrs::function::factorial::ln_factorial(u64::from(c))).sum()
    }

    /// Entries in ascending `(row, col, band, bin)` order.
    pub fn entries(&self) -> impl Iterator<Item = Entry> + '_ {
        let (n_col, n_l) = (self.dims.n_col, self.dims.n_band);
        (0..self.totals.len()).flat_map(move |key| {
            let (bins, counts) = self.slot(key);
            let p = key / n_l;
            bins.iter().zip(counts).map(move |(&t, &c)| Entry {
                row: p / n_col,
                col: p % n_col,
                band: key % n_l,
                bin: t as usize,
                count: c,
            })
        })
    }

    /// Total-photon image: `Σ_l ỹ` per pixel.
    pub fn photon_image(&self) -> Vec<u64> {
        self.totals.chunks(self.dims.n_band).map(|c| c.iter().sum()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> GridDims {
        GridDims::new(2, 3, 2, 5, 2.0).unwrap()
    }

    #[test]
    fn totals_are_cached_sums() {
        let e = |bin, count| Entry { row: 1, col: 2, band: 1, bin, count };
        let cube = PhotonCube::from_entries(dims(), [e(3, 1), e(2, 2), e(3, 0)]).unwrap();
        assert_eq!(cube.y_tilde(dims().pixel(1, 2), 1), 3);
        assert_eq!(cube.get(1, 2, 1, 2), 2);
        assert_eq!(cube.get(1, 2, 1, 1), 0);
        assert_eq!(cube.nnz(), 2);
    }

    #[test]
    fn duplicates_are_summed() {
        let e = Entry { row: 0, col: 0, band: 0, bin: 4, count: 2 };
        let cube = PhotonCube::from_entries(dims(), [e, e]).unwrap();
        assert_eq!(cube.get(0, 0, 0, 4), 4);
        assert_eq!(cube.nnz(), 1);
    }

    #[test]
    fn out_of_range_rejected() {
        let bad = Entry { row: 0, col: 0, band: 0, bin: 6, count: 1 };
        assert!(PhotonCube::from_entries(dims(), [bad]).is_err());
        let bad = Entry { row: 0, col: 0, band: 0, bin: 0, count: 1 };
        assert!(PhotonCube::from_entries(dims(), [bad]).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let d = dims();
        let dense: Vec<u32> = (0..d.n_pixels() * d.n_band * d.n_bin).map(|k| (k * 7 % 5) as u32 % 3).collect();
        let cube = PhotonCube::from_dense(d, &dense).unwrap();
        assert_eq!(cube.to_dense(), dense);
        let again = PhotonCube::from_entries(d, cube.entries()).unwrap();
        assert_eq!(again, cube);
    }

    #[test]
    fn empty_cube() {
        let cube = PhotonCube::empty(dims());
        assert_eq!(cube.total_photons(), 0);
        assert_eq!(cube.empty_fraction(), 1.0);
        assert_eq!(cube.entries().count(), 0);
        assert_eq!(cube, PhotonCube::from_entries(dims(), []).unwrap());
    }
}
