//! Per-band impulse responses with an optional per-pixel delay map.
//!
//! A response is a function of the lag `k = t - t0` between a time bin `t`
//! and the depth bin `t0`. Dense responses read from file put their first
//! value at lag 0; Gaussian responses are centred on lag `mu + delay`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of standard deviations kept on each side of a Gaussian response.
pub const GAUSS_TRUNCATION: f64 = 6.0;

/// Conversion between full width at half maximum and standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BandResponse {
    /// `values[k]` is the response at lag `k` (file row `k + 1`).
    Dense(Vec<f64>),
    Gaussian { eta: f64, mu: f64, sigma: f64, delay: f64 },
}

/// Response restricted to its nonzero lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub first_lag: i64,
    pub values: Vec<f64>,
}

impl Kernel {
    #[inline]
    pub fn last_lag(&self) -> i64 {
        self.first_lag + self.values.len() as i64 - 1
    }

    #[inline]
    pub fn at(&self, lag: i64) -> f64 {
        let k = lag - self.first_lag;
        if k < 0 || k >= self.values.len() as i64 {
            0.0
        } else {
            self.values[k as usize]
        }
    }

    pub fn area(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ_{t=1..n_bin} g(t - shift)`.
    pub fn windowed_sum(&self, shift: i64, n_bin: usize) -> f64 {
        let lo = (1 - shift).max(self.first_lag);
        let hi = (n_bin as i64 - shift).min(self.last_lag());
        if lo > hi {
            return 0.0;
        }
        let a = (lo - self.first_lag) as usize;
        let b = (hi - self.first_lag) as usize;
        self.values[a..=b].iter().sum()
    }
}

fn render(resp: &BandResponse) -> Kernel {
    match resp {
        BandResponse::Dense(v) => {
            let first = v.iter().position(|&g| g > 0.0).unwrap_or(0);
            let last = v.iter().rposition(|&g| g > 0.0).unwrap_or(0);
            Kernel { first_lag: first as i64, values: v[first..=last].to_vec() }
        }
        &BandResponse::Gaussian { eta, mu, sigma, delay } => {
            let c = mu + delay;
            let half = GAUSS_TRUNCATION * sigma;
            let lo = (c - half).ceil() as i64;
            let hi = (c + half).floor() as i64;
            let values = (lo..=hi)
                .map(|k| {
                    let u = (k as f64 - c) / sigma;
                    eta * (-0.5 * u * u).exp()
                })
                .collect();
            Kernel { first_lag: lo, values }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponseSet {
    n_bin: usize,
    bands: Vec<BandResponse>,
    kernels: Vec<Kernel>,
    /// Per-pixel integer delays in bins, row-major.
    delays: Option<Vec<i64>>,
}

impl ImpulseResponseSet {
    pub fn new(n_bin: usize, bands: Vec<BandResponse>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::invalid("impulse response set has no bands"));
        }
        for (l, b) in bands.iter().enumerate() {
            match b {
                BandResponse::Dense(v) => {
                    if v.len() != n_bin {
                        return Err(Error::invalid(format!(
                            "bin-count mismatch: band {l} response has {} bins, expected {n_bin}",
                            v.len()
                        )));
                    }
                    if let Some(g) = v.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                        return Err(Error::invalid(format!("negative entry in band {l} response: {g}")));
                    }
                    if !v.iter().any(|&g| g > 0.0) {
                        return Err(Error::invalid(format!("band {l} response is identically zero")));
                    }
                }
                &BandResponse::Gaussian { eta, mu, sigma, delay } => {
                    if !(eta > 0.0 && eta.is_finite()) || !(sigma > 0.0 && sigma.is_finite()) {
                        return Err(Error::invalid(format!(
                            "band {l} Gaussian response needs eta > 0 and sigma > 0, got eta={eta}, sigma={sigma}"
                        )));
                    }
                    if !mu.is_finite() || !delay.is_finite() {
                        return Err(Error::invalid(format!("band {l} Gaussian response has a non-finite centre")));
                    }
                }
            }
        }
        let kernels = bands.iter().map(render).collect();
        Ok(Self { n_bin, bands, kernels, delays: None })
    }

    /// Gaussian responses with widths given as FWHM in picoseconds.
    pub fn gaussian(n_bin: usize, bin_ps: f64, eta: &[f64], fwhm_ps: &[f64], delay_bins: &[f64]) -> Result<Self> {
        if eta.len() != fwhm_ps.len() || eta.len() != delay_bins.len() {
            return Err(Error::invalid("Gaussian response parameter lists differ in length"));
        }
        if let Some(f) = fwhm_ps.iter().find(|f| !(**f > 0.0)) {
            return Err(Error::invalid(format!("FWHM must be positive, got {f}")));
        }
        let bands = eta
            .iter()
            .zip(fwhm_ps)
            .zip(delay_bins)
            .map(|((&eta, &fwhm), &delay)| BandResponse::Gaussian { eta, mu: 0.0, sigma: fwhm_to_sigma_bins(fwhm, bin_ps), delay })
            .collect();
        Self::new(n_bin, bands)
    }

    /// The same responses with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("response scale must be positive, got {factor}")));
        }
        let bands = self
            .bands
            .iter()
            .map(|b| match b {
                BandResponse::Dense(v) => BandResponse::Dense(v.iter().map(|g| g * factor).collect()),
                &BandResponse::Gaussian { eta, mu, sigma, delay } => BandResponse::Gaussian { eta: eta * factor, mu, sigma, delay },
            })
            .collect();
        Ok(Self::new(self.n_bin, bands)?.with_delays(self.delays.clone()))
    }

    pub fn with_delays(mut self, delays: Option<Vec<i64>>) -> Self {
        self.delays = delays;
        self
    }

    #[inline]
    pub fn n_band(&self) -> usize {
        self.kernels.len()
    }

    #[inline]
    pub fn n_bin(&self) -> usize {
        self.n_bin
    }

    pub fn bands(&self) -> &[BandResponse] {
        &self.bands
    }

    #[inline]
    pub fn kernel(&self, l: usize) -> &Kernel {
        &self.kernels[l]
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn delays(&self) -> Option<&[i64]> {
        self.delays.as_deref()
    }

    #[inline]
    pub fn delay(&self, p: usize) -> i64 {
        self.delays.as_ref().map_or(0, |d| d[p])
    }

    /// `(min, max)` over the delay map, `(0, 0)` without one.
    pub fn delay_range(&self) -> (i64, i64) {
        match &self.delays {
            Some(d) if !d.is_empty() => (*d.iter().min().unwrap(), *d.iter().max().unwrap()),
            _ => (0, 0),
        }
    }

    /// Response of band `l` at pixel delay `d`, evaluated at bin `t` for depth `t0`.
    #[inline]
    pub fn value(&self, l: usize, t: usize, t0: usize, d: i64) -> f64 {
        self.kernels[l].at(t as i64 - t0 as i64 - d)
    }

    /// Dense response of band `l` over lags `0..n_bin` (no delay).
    pub fn dense(&self, l: usize) -> Vec<f64> {
        (0..self.n_bin as i64).map(|k| self.kernels[l].at(k)).collect()
    }

    /// Smallest symmetric margin (in bins) for which no response is cut by
    /// the histogram edges at any pixel.
    pub fn truncation_margin(&self) -> usize {
        let (d_min, d_max) = self.delay_range();
        let left = self.kernels.iter().map(|k| -(k.first_lag + d_min)).max().unwrap_or(0);
        let right = self.kernels.iter().map(|k| k.last_lag() + d_max).max().unwrap_or(0);
        left.max(right).max(0) as usize
    }
}

#[inline]
pub fn fwhm_to_sigma_bins(fwhm_ps: f64, bin_ps: f64) -> f64 {
    fwhm_ps / (bin_ps * FWHM_PER_SIGMA)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixty_ps_at_two_ps_bins() {
        let s = fwhm_to_sigma_bins(60.0, 2.0);
        assert!((s - 12.739827).abs() < 1e-5, "{s}");
    }

    #[test]
    fn gaussian_area_matches_integral() {
        let set = ImpulseResponseSet::new(
            3000,
            vec![BandResponse::Gaussian { eta: 0.7, mu: 0.0, sigma: 12.74, delay: 0.3 }],
        )
        .unwrap();
        let exact = 0.7 * 12.74 * (2.0 * std::f64::consts::PI).sqrt();
        let rel = (set.kernel(0).area() - exact).abs() / exact;
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn gaussian_symmetric_about_integer_centre() {
        let set = ImpulseResponseSet::new(100, vec![BandResponse::Gaussian { eta: 1.0, mu: 3.0, sigma: 2.5, delay: 1.0 }])
            .unwrap();
        let k = set.kernel(0);
        for u in 0..20 {
            assert_eq!(k.at(4 + u), k.at(4 - u));
        }
        assert_eq!(k.first_lag, 4 - 15);
        assert_eq!(k.last_lag(), 4 + 15);
    }

    #[test]
    fn dense_is_trimmed_and_indexed_from_lag_zero() {
        let mut v = vec![0.0; 10];
        v[2] = 1.0;
        v[3] = 2.0;
        let set = ImpulseResponseSet::new(10, vec![BandResponse::Dense(v.clone())]).unwrap();
        assert_eq!(set.kernel(0).first_lag, 2);
        assert_eq!(set.dense(0), v);
        assert_eq!(set.value(0, 5, 2, 0), 2.0);
        assert_eq!(set.value(0, 5, 1, 1), 2.0);
    }

    #[test]
    fn windowed_sum_clips_to_histogram() {
        let set = ImpulseResponseSet::new(4, vec![BandResponse::Dense(vec![1.0, 1.0, 1.0, 1.0])]).unwrap();
        let k = set.kernel(0);
        assert_eq!(k.windowed_sum(1, 4), 4.0);
        assert_eq!(k.windowed_sum(0, 4), 3.0);
        assert_eq!(k.windowed_sum(2, 4), 3.0);
        assert_eq!(k.windowed_sum(-1, 4), 2.0);
        assert_eq!(k.windowed_sum(10, 4), 0.0);
    }

    #[test]
    fn invalid_responses_rejected() {
        assert!(ImpulseResponseSet::new(3, vec![BandResponse::Dense(vec![0.0, 0.0, 0.0])]).is_err());
        assert!(ImpulseResponseSet::new(3, vec![BandResponse::Dense(vec![1.0, -1.0, 0.0])]).is_err());
        assert!(ImpulseResponseSet::new(3, vec![BandResponse::Dense(vec![1.0])]).is_err());
        assert!(ImpulseResponseSet::new(3, vec![BandResponse::Gaussian { eta: 1.0, mu: 0.0, sigma: 0.0, delay: 0.0 }])
            .is_err());
    }

    #[test]
    fn margin_covers_tails_and_delays() {
        let set = ImpulseResponseSet::new(300, vec![BandResponse::Gaussian { eta: 1.0, mu: 0.0, sigma: 2.0, delay: 0.0 }])
            .unwrap()
            .with_delays(Some(vec![-3, 0, 2]));
        assert_eq!(set.truncation_margin(), 15);
    }
}
