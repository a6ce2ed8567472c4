//! Point estimates, uncertainty maps, the pixel-wise ML baseline and
//! evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::cube::PhotonCube;
use crate::error::{Error, Result};
use crate::grid::{DepthSupport, GridDims};
use crate::irf::ImpulseResponseSet;
use crate::likelihood::{band_log_profile_into, SuffStats};
use crate::library::EndmemberLibrary;
use crate::state::SceneState;

/// Floor of the anomaly log-intensity map.
pub const ANOMALY_LOG_FLOOR: f64 = -12.0;

/// Relative tolerance under which two objective values count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// One stored post-burn-in state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: Vec<usize>,
    pub a: Vec<f64>,
    pub z: Vec<u8>,
    pub x: Vec<f64>,
}

impl From<&SceneState> for Sample {
    fn from(s: &SceneState) -> Self {
        Self { t: s.t.clone(), a: s.a.clone(), z: s.z.clone(), x: s.x.clone() }
    }
}

/// Running sums from which every estimator can be formed without keeping
/// the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub n: usize,
    pub n_pixels: usize,
    pub n_band: usize,
    pub n_endmember: usize,
    pub sup: DepthSupport,
    /// Sample histogram of depths, `[pixel][t − t_min]`.
    pub depth_hist: Vec<u32>,
    /// Sum of the per-sweep depth conditionals, `[pixel][t − t_min]`.
    pub depth_rb: Vec<f64>,
    pub a_sum: Vec<f64>,
    pub a_sq_sum: Vec<f64>,
    pub z_count: Vec<u32>,
    /// Sum of `x` over the sweeps where `z = 1`.
    pub x_sum: Vec<f64>,
}

impl Accumulator {
    pub fn new(n_pixels: usize, n_band: usize, n_endmember: usize, sup: DepthSupport) -> Self {
        let t_len = sup.len();
        Self {
            n: 0,
            n_pixels,
            n_band,
            n_endmember,
            sup,
            depth_hist: vec![0; n_pixels * t_len],
            depth_rb: vec![0.0; n_pixels * t_len],
            a_sum: vec![0.0; n_pixels * n_endmember],
            a_sq_sum: vec![0.0; n_pixels * n_endmember],
            z_count: vec![0; n_pixels * n_band],
            x_sum: vec![0.0; n_pixels * n_band],
        }
    }

    pub fn push(&mut self, s: &SceneState) {
        self.n += 1;
        let t_len = self.sup.len();
        for (p, &t) in s.t.iter().enumerate() {
            self.depth_hist[p * t_len + self.sup.index_of(t)] += 1;
        }
        for (k, &a) in s.a.iter().enumerate() {
            self.a_sum[k] += a;
            self.a_sq_sum[k] += a * a;
        }
        for (k, &z) in s.z.iter().enumerate() {
            if z == 1 {
                self.z_count[k] += 1;
                self.x_sum[k] += s.x[k];
            }
        }
    }

    fn require(&self) -> Result<()> {
        if self.n == 0 {
            Err(Error::invalid("no post-burn-in samples were recorded"))
        } else {
            Ok(())
        }
    }

    pub fn abundances(&self) -> Result<Vec<f64>> {
        self.require()?;
        Ok(self.a_sum.iter().map(|s| s / self.n as f64).collect())
    }

    /// Posterior standard deviation of every abundance.
    pub fn abundance_sd(&self) -> Result<Vec<f64>> {
        self.require()?;
        let n = self.n as f64;
        Ok(self
            .a_sum
            .iter()
            .zip(&self.a_sq_sum)
            .map(|(s, q)| (q / n - (s / n).powi(2)).max(0.0).sqrt())
            .collect())
    }

    pub fn label_frequency(&self) -> Result<Vec<f64>> {
        self.require()?;
        Ok(self.z_count.iter().map(|&c| c as f64 / self.n as f64).collect())
    }

    pub fn labels(&self) -> Result<Vec<u8>> {
        Ok(self.label_frequency()?.into_iter().map(|f| (f > 0.5) as u8).collect())
    }

    /// Conditional means of `x` given `z = 1`, masked by `ẑ`.
    pub fn anomalies(&self, zhat: &[u8]) -> Vec<f64> {
        zhat.iter()
            .enumerate()
            .map(|(k, &z)| if z == 1 && self.z_count[k] > 0 { self.x_sum[k] / self.z_count[k] as f64 } else { 0.0 })
            .collect()
    }

    /// Histogram mode and its frequency for every pixel.
    pub fn histogram_depths(&self) -> Result<(Vec<usize>, Vec<f64>)> {
        self.require()?;
        let t_len = self.sup.len();
        Ok((0..self.n_pixels)
            .map(|p| {
                let row = &self.depth_hist[p * t_len..(p + 1) * t_len];
                let (k, &c) = row.iter().enumerate().fold((0, &0u32), |best, cur| if cur.1 > best.1 { cur } else { best });
                (self.sup.bin_at(k), c as f64 / self.n as f64)
            })
            .unzip())
    }

    /// Mode of the averaged depth conditionals and its probability. Pixels
    /// whose averaged conditional is flat (no information at all) take the
    /// depth of the nearest informative pixel; their confidence stays `1/T'`.
    pub fn rao_blackwell_depths(&self, n_col: usize) -> Result<(Vec<usize>, Vec<f64>)> {
        self.require()?;
        let t_len = self.sup.len();
        let mut t = vec![0usize; self.n_pixels];
        let mut conf = vec![0.0; self.n_pixels];
        let mut informative = vec![true; self.n_pixels];
        for p in 0..self.n_pixels {
            let row = &self.depth_rb[p * t_len..(p + 1) * t_len];
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
            let k = argmax_first(row);
            t[p] = self.sup.bin_at(k);
            conf[p] = (row[k] / self.n as f64).clamp(0.0, 1.0);
            informative[p] = hi - lo > TIE_TOLERANCE * hi.abs();
        }
        if informative.iter().any(|&v| v) {
            nearest_fill(&mut t, &informative, n_col);
        }
        Ok((t, conf))
    }
}

/// Index of the largest value; values within the tie tolerance of the
/// maximum resolve to the smallest index.
pub fn argmax_first(v: &[f64]) -> usize {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * m.abs().max(1.0);
    v.iter().position(|&x| x >= m - tol).unwrap_or(0)
}

/// Replaces every entry with `known[p] == false` by the value of the
/// nearest known pixel (Euclidean distance, ties to the lower index).
pub fn nearest_fill<T: Copy>(values: &mut [T], known: &[bool], n_col: usize) {
    let sources: Vec<usize> = (0..values.len()).filter(|&p| known[p]).collect();
    if sources.is_empty() {
        return;
    }
    for p in 0..values.len() {
        if known[p] {
            continue;
        }
        let (i, j) = ((p / n_col) as i64, (p % n_col) as i64);
        let mut best = (i64::MAX, 0usize);
        for &q in &sources {
            let (qi, qj) = ((q / n_col) as i64, (q % n_col) as i64);
            let d = (qi - i).pow(2) + (qj - j).pow(2);
            if d < best.0 {
                best = (d, q);
            }
        }
        values[p] = values[best.1];
    }
}

/// Per-site mean of the abundance samples.
pub fn mmse_abundances(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = samples.first().ok_or_else(|| Error::invalid("empty chain"))?;
    let mut out = vec![0.0; first.len()];
    for s in samples {
        for (o, v) in out.iter_mut().zip(s) {
            *o += v;
        }
    }
    let n = samples.len() as f64;
    Ok(out.into_iter().map(|v| v / n).collect())
}

/// `ẑ = 1` where the label was on in more than half of the samples.
pub fn mmap_labels(samples: &[Vec<u8>]) -> Result<Vec<u8>> {
    let first = samples.first().ok_or_else(|| Error::invalid("empty chain"))?;
    let mut counts = vec![0usize; first.len()];
    for s in samples {
        for (c, &z) in counts.iter_mut().zip(s) {
            *c += z as usize;
        }
    }
    Ok(counts.into_iter().map(|c| (2 * c > samples.len()) as u8).collect())
}

/// Mean of `x` over the samples with `z = 1`, where `ẑ = 1`; zero elsewhere.
pub fn mmse_anomaly_values(z_samples: &[Vec<u8>], x_samples: &[Vec<f64>], zhat: &[u8]) -> Vec<f64> {
    let mut sum = vec![0.0; zhat.len()];
    let mut cnt = vec![0usize; zhat.len()];
    for (zs, xs) in z_samples.iter().zip(x_samples) {
        for k in 0..zhat.len() {
            if zs[k] == 1 {
                sum[k] += xs[k];
                cnt[k] += 1;
            }
        }
    }
    (0..zhat.len()).map(|k| if zhat[k] == 1 && cnt[k] > 0 { sum[k] / cnt[k] as f64 } else { 0.0 }).collect()
}

/// Modal depth of every pixel's samples (smallest bin on ties) and the
/// fraction of samples equal to it.
pub fn mmap_depth_and_confidence(samples: &[Vec<usize>]) -> Result<(Vec<usize>, Vec<f64>)> {
    let first = samples.first().ok_or_else(|| Error::invalid("empty chain"))?;
    let n = samples.len() as f64;
    let mut t_hat = Vec::with_capacity(first.len());
    let mut conf = Vec::with_capacity(first.len());
    for p in 0..first.len() {
        let mut vals: Vec<usize> = samples.iter().map(|s| s[p]).collect();
        vals.sort_unstable();
        let (mut best, mut best_n) = (vals[0], 0usize);
        let mut k = 0;
        while k < vals.len() {
            let mut e = k;
            while e < vals.len() && vals[e] == vals[k] {
                e += 1;
            }
            if e - k > best_n {
                best = vals[k];
                best_n = e - k;
            }
            k = e;
        }
        t_hat.push(best);
        conf.push(best_n as f64 / n);
    }
    Ok((t_hat, conf))
}

/// Which bands the ML baseline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlMode {
    Band(usize),
    Joint,
}

/// Pixel-wise maximum-likelihood depths with the per-band amplitude
/// profiled out (`λ̂_l = ỹ_l / g̃_l(t0)`): `t̂ = argmax Σ_l [Σ_t y log g −
/// ỹ_l log g̃_l(t0)]`. Pixels without photons in the used bands take the
/// nearest estimated depth.
pub fn ml_depth_baseline(cube: &PhotonCube, irf: &ImpulseResponseSet, stats: &SuffStats, mode: MlMode) -> Result<Vec<usize>> {
    let dims = *cube.dims();
    let sup = *stats.support();
    match mode {
        MlMode::Joint => joint_ml_depths(stats),
        MlMode::Band(l) if l < dims.n_band => profile_ml(stats, &[l], |p, out| band_log_profile_into(cube, irf, &sup, p, l, out)),
        MlMode::Band(l) => Err(Error::OutOfRange(format!("band {l} outside 0..{}", dims.n_band))),
    }
}

/// Joint-band ML depths from the look-up tables alone.
pub fn joint_ml_depths(stats: &SuffStats) -> Result<Vec<usize>> {
    let bands: Vec<usize> = (0..stats.n_band()).collect();
    profile_ml(stats, &bands, |p, out| out.copy_from_slice(stats.depth_base(p)))
}

/// Depth maximising the log-likelihood pooled over a `(2 radius + 1)²`
/// window. Pixels whose window holds no photon keep the joint ML value.
pub fn pooled_ml_depths(stats: &SuffStats, radius: usize) -> Result<Vec<usize>> {
    let mut t = joint_ml_depths(stats)?;
    let dims = *stats.dims();
    let sup = *stats.support();
    let mut obj = vec![0.0; sup.len()];
    for i in 0..dims.n_row {
        for j in 0..dims.n_col {
            obj.fill(0.0);
            let mut any = false;
            for a in i.saturating_sub(radius)..(i + radius + 1).min(dims.n_row) {
                for b in j.saturating_sub(radius)..(j + radius + 1).min(dims.n_col) {
                    let q = a * dims.n_col + b;
                    if stats.y_tilde_pixel(q).iter().any(|&y| y > 0.0) {
                        any = true;
                        for (o, v) in obj.iter_mut().zip(stats.depth_base(q)) {
                            *o += v;
                        }
                    }
                }
            }
            if any {
                t[i * dims.n_col + j] = sup.bin_at(argmax_first(&obj));
            }
        }
    }
    Ok(t)
}

fn profile_ml(stats: &SuffStats, bands: &[usize], base: impl Fn(usize, &mut [f64])) -> Result<Vec<usize>> {
    let dims = *stats.dims();
    let sup = *stats.support();
    let n = dims.n_pixels();
    let mut t = vec![sup.t_min; n];
    let mut known = vec![false; n];
    let mut obj = vec![0.0; sup.len()];
    for p in 0..n {
        let y = stats.y_tilde_pixel(p);
        if bands.iter().all(|&l| y[l] == 0.0) {
            continue;
        }
        base(p, &mut obj);
        let d = stats.delay(p);
        for &l in bands {
            if y[l] == 0.0 || stats.g_tilde_is_flat(l) {
                continue;
            }
            for (o, g) in obj.iter_mut().zip(stats.g_tilde_row(l, d)) {
                *o -= y[l] * g.ln();
            }
        }
        t[p] = sup.bin_at(argmax_first(&obj));
        known[p] = true;
    }
    if !known.iter().any(|&k| k) {
        return Err(Error::invalid("no pixel has photons in the selected bands"));
    }
    nearest_fill(&mut t, &known, dims.n_col);
    Ok(t)
}

/// Root-mean-square depth error in millimetres.
pub fn rmse(t_hat: &[usize], t_ref: &[usize], dims: &GridDims) -> Result<f64> {
    if t_hat.len() != t_ref.len() || t_hat.is_empty() {
        return Err(Error::invalid(format!("depth maps have {} and {} pixels", t_hat.len(), t_ref.len())));
    }
    let ss: f64 = t_hat.iter().zip(t_ref).map(|(&a, &b)| (a as f64 - b as f64).powi(2)).sum();
    Ok((ss / t_hat.len() as f64).sqrt() * dims.mm_per_bin())
}

/// Precision, recall and F1 score of estimated against true labels. With no
/// positives in either map all three are 1.
pub fn label_scores(est: &[u8], truth: &[u8]) -> Result<(f64, f64, f64)> {
    if est.len() != truth.len() {
        return Err(Error::invalid(format!("label maps have {} and {} sites", est.len(), truth.len())));
    }
    let tp = est.iter().zip(truth).filter(|(&e, &t)| e == 1 && t == 1).count() as f64;
    let fp = est.iter().zip(truth).filter(|(&e, &t)| e == 1 && t == 0).count() as f64;
    let fneg = est.iter().zip(truth).filter(|(&e, &t)| e == 0 && t == 1).count() as f64;
    if tp + fp + fneg == 0.0 {
        return Ok((1.0, 1.0, 1.0));
    }
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
    let f1 = 2.0 * tp / (2.0 * tp + fp + fneg);
    Ok((precision, recall, f1))
}

pub fn label_f1(est: &[u8], truth: &[u8]) -> Result<f64> {
    Ok(label_scores(est, truth)?.2)
}

/// `log(‖r̂‖² / L)` per pixel, floored at [`ANOMALY_LOG_FLOOR`].
pub fn anomaly_log_intensity(r_hat: &[f64], n_band: usize) -> Vec<f64> {
    r_hat
        .chunks(n_band)
        .map(|r| {
            let e = r.iter().map(|v| v * v).sum::<f64>() / n_band as f64;
            if e > 0.0 {
                e.ln().max(ANOMALY_LOG_FLOOR)
            } else {
                ANOMALY_LOG_FLOOR
            }
        })
        .collect()
}

/// Depth estimates that maximise the likelihood at plugged-in abundance
/// and anomaly estimates, pixel by pixel.
pub fn plug_in_depths(stats: &SuffStats, lib: &EndmemberLibrary, a_hat: &[f64], r_hat: &[f64]) -> Vec<usize> {
    let sup = *stats.support();
    let n_end = lib.n_endmember();
    let n_band = lib.n_band();
    let mut w = vec![0.0; sup.len()];
    (0..stats.dims().n_pixels())
        .map(|p| {
            let mut lam = lib.mix(&a_hat[p * n_end..(p + 1) * n_end]);
            for (l, v) in lam.iter_mut().enumerate() {
                *v += r_hat[p * n_band + l];
            }
            stats.depth_log_lik_into(p, &lam, &mut w);
            sup.bin_at(argmax_first(&w))
        })
        .collect()
}

/// Monte Carlo standard error of the mean of a series by non-overlapping
/// batch means.
pub fn batch_means_se(series: &[f64], n_batches: usize) -> f64 {
    let b = series.len() / n_batches.max(1);
    if b == 0 || n_batches < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..n_batches).map(|k| series[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64).collect();
    let m = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    (var / n_batches as f64).sqrt()
}

/// Every map produced from one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateBundle {
    pub n_row: usize,
    pub n_col: usize,
    pub n_band: usize,
    pub n_endmember: usize,
    pub depth_bins: Vec<usize>,
    pub depth_mm: Vec<f64>,
    pub confidence: Vec<f64>,
    /// `[pixel][endmember]`.
    pub abundances: Vec<f64>,
    /// `[pixel][band]`.
    pub labels: Vec<u8>,
    /// `r̂ = ẑ ⊙ x̄`, `[pixel][band]`.
    pub anomalies: Vec<f64>,
    pub anomaly_log_intensity: Vec<f64>,
}

/// How depth estimates are formed from the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthEstimator {
    /// Mode of the averaged per-sweep conditionals.
    RaoBlackwell,
    /// Mode of the sample histogram.
    Histogram,
}

impl EstimateBundle {
    pub fn from_accumulator(acc: &Accumulator, dims: &GridDims, reference_bin: usize, depth: DepthEstimator) -> Result<Self> {
        let (depth_bins, confidence) = match depth {
            DepthEstimator::RaoBlackwell => acc.rao_blackwell_depths(dims.n_col)?,
            DepthEstimator::Histogram => acc.histogram_depths()?,
        };
        let depth_mm = depth_bins
            .iter()
            .map(|&t| (t as f64 - reference_bin as f64) * dims.mm_per_bin())
            .collect();
        let abundances = acc.abundances()?;
        let labels = acc.labels()?;
        let anomalies = acc.anomalies(&labels);
        let anomaly_log_intensity = anomaly_log_intensity(&anomalies, acc.n_band);
        Ok(Self {
            n_row: dims.n_row,
            n_col: dims.n_col,
            n_band: acc.n_band,
            n_endmember: acc.n_endmember,
            depth_bins,
            depth_mm,
            confidence,
            abundances,
            labels,
            anomalies,
            anomaly_log_intensity,
        })
    }

    pub fn mean_confidence(&self) -> f64 {
        self.confidence.iter().sum::<f64>() / self.confidence.len() as f64
    }
}
