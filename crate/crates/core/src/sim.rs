//! Synthetic scenes and the Poisson forward simulator.
//!
//! A scene is a dark backboard plane with a few brighter objects in front
//! of it, each made of one endmember, plus thin anomaly strips confined to
//! the last bands.

use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::cube::{Entry, PhotonCube};
use crate::error::{Error, Result};
use crate::grid::{DepthSupport, GridDims};
use crate::irf::ImpulseResponseSet;
use crate::library::EndmemberLibrary;
use crate::par;
use crate::rng::{site_rng, Stage};

/// Region shape in fractional image coordinates (`0..1` along rows and
/// columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// Radius as a fraction of the shorter image side.
    Disk { row: f64, col: f64, radius: f64 },
    Rect { row0: f64, col0: f64, row1: f64, col1: f64 },
    /// Every column at or right of `col`.
    HalfPlane { col: f64 },
}

impl Shape {
    /// Signed distance in pixels to the region border, negative inside.
    fn distance(&self, i: usize, j: usize, n_row: usize, n_col: usize) -> f64 {
        let (y, x) = (i as f64 + 0.5, j as f64 + 0.5);
        match *self {
            Shape::Disk { row, col, radius } => {
                let r = radius * n_row.min(n_col) as f64;
                let (cy, cx) = (row * n_row as f64, col * n_col as f64);
                ((y - cy).powi(2) + (x - cx).powi(2)).sqrt() - r
            }
            Shape::Rect { row0, col0, row1, col1 } => {
                let dy = (row0 * n_row as f64 - y).max(y - row1 * n_row as f64);
                let dx = (col0 * n_col as f64 - x).max(x - col1 * n_col as f64);
                dy.max(dx)
            }
            Shape::HalfPlane { col } => col * n_col as f64 - x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub endmember: usize,
    /// Depth relative to the backboard, in bins (negative is closer).
    pub depth_offset: i64,
}

/// Horizontal anomaly strip, `thickness` pixels tall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    pub row: f64,
    pub col0: f64,
    pub col1: f64,
    pub thickness: usize,
    /// Mean anomaly value relative to the mean object spectrum.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub n_row: usize,
    pub n_col: usize,
    pub n_band: usize,
    pub n_endmember: usize,
    pub n_bin: usize,
    pub bin_ps: f64,
    /// Backboard depth in bins.
    pub back_depth: usize,
    pub back_endmember: usize,
    /// Backboard abundance; objects have abundance `object_level`.
    pub back_level: f64,
    pub object_level: f64,
    pub objects: Vec<ObjectSpec>,
    /// Width in pixels of the linear blend at object borders (0 = sharp).
    pub mixing_width: f64,
    pub strips: Vec<StripSpec>,
    /// Strips occupy this many trailing bands.
    pub strip_bands: usize,
    /// Shape of the gamma law of anomaly values around their mean.
    pub strip_shape: f64,
    /// Depths must lie here; `None` uses the `T / 10` margin rule.
    pub support: Option<DepthSupport>,
    pub seed: u64,
}

const DISK_LAYOUT: [(f64, f64); 6] = [(0.28, 0.27), (0.3, 0.73), (0.72, 0.5), (0.75, 0.15), (0.75, 0.85), (0.5, 0.5)];
const DEPTH_LAYOUT: [i64; 6] = [-12, -20, -28, -8, -16, -24];

impl SceneSpec {
    /// Default 64 x 64 scene with `n_endmember − 1` disks on the backboard
    /// and three anomaly strips.
    pub fn standard(n_band: usize, n_endmember: usize, n_bin: usize, seed: u64) -> Self {
        let objects = (1..n_endmember.min(DISK_LAYOUT.len() + 1))
            .map(|r| {
                let (row, col) = DISK_LAYOUT[r - 1];
                ObjectSpec { shape: Shape::Disk { row, col, radius: 0.17 }, endmember: r, depth_offset: DEPTH_LAYOUT[r - 1] }
            })
            .collect();
        let strips = vec![
            StripSpec { row: 0.08, col0: 0.3, col1: 0.7, thickness: 2, strength: 1.0 },
            StripSpec { row: 0.52, col0: 0.05, col1: 0.3, thickness: 2, strength: 0.6 },
            StripSpec { row: 0.94, col0: 0.45, col1: 0.8, thickness: 2, strength: 0.35 },
        ];
        Self {
            n_row: 64,
            n_col: 64,
            n_band,
            n_endmember,
            n_bin,
            bin_ps: 2.0,
            back_depth: n_bin / 2 + 10,
            back_endmember: 0,
            back_level: 0.15,
            object_level: 1.0,
            objects,
            mixing_width: 1.5,
            strips,
            strip_bands: 3.min(n_band),
            strip_shape: 20.0,
            support: None,
            seed,
        }
    }

    /// The standard layout with a dim backboard, which leaves roughly half
    /// of the pixels without a detection at one photon per pixel and band.
    pub fn dim_backboard(n_band: usize, n_endmember: usize, n_bin: usize, seed: u64) -> Self {
        Self { back_level: 0.02, ..Self::standard(n_band, n_endmember, n_bin, seed) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    pub dims: GridDims,
    pub n_endmember: usize,
    pub t: Vec<usize>,
    /// `[pixel][endmember]`, before the photon-budget gain.
    pub a: Vec<f64>,
    /// `[pixel][band]`, before the gain; zero off the strips.
    pub r: Vec<f64>,
    /// Labels of the anomaly sites.
    pub z: Vec<u8>,
    /// 0 for the backboard, `k + 1` for object `k`.
    pub region: Vec<u8>,
    /// Strip index plus one for every pixel on a strip, else 0.
    pub strip: Vec<u8>,
}

impl SyntheticScene {
    pub fn anomaly_fraction(&self) -> f64 {
        self.z.iter().filter(|&&z| z == 1).count() as f64 / self.z.len() as f64
    }
}

/// Smooth positive spectra over the bands, with endmembers 2 and 3 nearly
/// collinear. Endmember 0 is a flat grey.
pub fn make_library(n_band: usize, n_endmember: usize) -> Result<EndmemberLibrary> {
    let wl: Vec<f64> = (0..n_band).map(|l| 500.0 + 320.0 * l as f64 / (n_band.max(2) - 1) as f64).collect();
    let centre = |r: usize| match r {
        1 => 540.0,
        2 => 700.0,
        3 => 735.0,
        _ => 500.0 + (r as f64 * 97.0) % 320.0,
    };
    let mut m = vec![0.0; n_band * n_endmember];
    for (l, &w) in wl.iter().enumerate() {
        for r in 0..n_endmember {
            m[l * n_endmember + r] = if r == 0 { 0.5 } else { 0.15 + 0.85 * (-(w - centre(r)).powi(2) / (2.0 * 70f64.powi(2))).exp() };
        }
    }
    let names = (0..n_endmember).map(|r| if r == 0 { "backboard".to_string() } else { format!("material_{r}") }).collect();
    EndmemberLibrary::new(n_band, n_endmember, m, names, wl)
}

/// Builds the ground truth. The anomaly values are gamma-distributed
/// around each strip's strength times the mean object spectrum.
pub fn make_scene(spec: &SceneSpec, lib: &EndmemberLibrary) -> Result<SyntheticScene> {
    let dims = GridDims::new(spec.n_row, spec.n_col, spec.n_band, spec.n_bin, spec.bin_ps)?;
    if lib.n_band() != spec.n_band || lib.n_endmember() != spec.n_endmember {
        return Err(Error::invalid("library does not match the scene's bands and endmembers"));
    }
    let sup = match spec.support {
        Some(s) => s,
        None => DepthSupport::with_margin(spec.n_bin, 0)?,
    };
    let (n_row, n_col, n_band, n_end) = (spec.n_row, spec.n_col, spec.n_band, spec.n_endmember);
    if spec.back_endmember >= n_end || spec.objects.iter().any(|o| o.endmember >= n_end) {
        return Err(Error::invalid("object endmember outside the library"));
    }
    if spec.strip_bands > n_band {
        return Err(Error::invalid("strips occupy more bands than exist"));
    }
    let n = n_row * n_col;
    let mut t = vec![spec.back_depth; n];
    let mut a = vec![0.0; n * n_end];
    let mut region = vec![0u8; n];
    for i in 0..n_row {
        for j in 0..n_col {
            let p = i * n_col + j;
            let ap = &mut a[p * n_end..(p + 1) * n_end];
            ap[spec.back_endmember] = spec.back_level;
            for (k, o) in spec.objects.iter().enumerate() {
                let d = o.shape.distance(i, j, n_row, n_col);
                if d < 0.0 {
                    region[p] = (k + 1) as u8;
                    t[p] = (spec.back_depth as i64 + o.depth_offset).max(0) as usize;
                    ap.fill(0.0);
                    ap[o.endmember] = spec.object_level;
                    if spec.mixing_width > 0.0 && -d < spec.mixing_width {
                        let w = -d / spec.mixing_width;
                        ap[o.endmember] = spec.object_level * (0.5 + 0.5 * w);
                        ap[spec.back_endmember] += spec.back_level + spec.object_level * 0.5 * (1.0 - w);
                    }
                }
            }
        }
    }
    if let Some(p) = t.iter().position(|&v| !sup.contains(v)) {
        return Err(Error::OutOfRange(format!("depth {} at pixel {p} outside support {}..={}", t[p], sup.t_min, sup.t_max)));
    }

    let objects: Vec<usize> = spec.objects.iter().map(|o| o.endmember).collect();
    let mean_obj: Vec<f64> = (0..n_band)
        .map(|l| {
            if objects.is_empty() {
                lib.row(l).iter().sum::<f64>() / n_end as f64 * spec.object_level
            } else {
                objects.iter().map(|&r| lib.at(l, r)).sum::<f64>() / objects.len() as f64 * spec.object_level
            }
        })
        .collect();
    let mut r = vec![0.0; n * n_band];
    let mut z = vec![0u8; n * n_band];
    let mut strip = vec![0u8; n];
    for (k, s) in spec.strips.iter().enumerate() {
        let i0 = ((s.row * n_row as f64).floor() as usize).min(n_row.saturating_sub(s.thickness));
        let (j0, j1) = ((s.col0 * n_col as f64).floor() as usize, (s.col1 * n_col as f64).ceil() as usize);
        if i0 + s.thickness > n_row || j1 > n_col || j0 >= j1 || s.thickness == 0 {
            return Err(Error::OutOfRange(format!("strip {k} does not fit the {n_row}x{n_col} grid")));
        }
        for i in i0..i0 + s.thickness {
            for j in j0..j1 {
                let p = i * n_col + j;
                strip[p] = (k + 1) as u8;
                for l in n_band - spec.strip_bands..n_band {
                    let mean = s.strength * mean_obj[l];
                    let g = Gamma::new(spec.strip_shape, mean / spec.strip_shape)
                        .map_err(|e| Error::invalid(format!("strip {k}: {e}")))?;
                    let mut rng = site_rng(spec.seed, 0, Stage::SceneLayout, (p * n_band + l) as u64);
                    r[p * n_band + l] = g.sample(&mut rng);
                    z[p * n_band + l] = 1;
                }
            }
        }
    }
    Ok(SyntheticScene { dims, n_endmember: n_end, t, a, r, z, region, strip })
}

/// Gaussian responses whose FWHM runs linearly from `fwhm_ps.0` to
/// `fwhm_ps.1` across the bands.
pub fn make_irf_set(
    n_bin: usize,
    bin_ps: f64,
    n_band: usize,
    fwhm_ps: (f64, f64),
    eta: &[f64],
    delays: &[f64],
) -> Result<ImpulseResponseSet> {
    if eta.len() != n_band || delays.len() != n_band {
        return Err(Error::invalid("amplitude and delay profiles need one entry per band"));
    }
    let fwhm: Vec<f64> = (0..n_band)
        .map(|l| {
            let f = if n_band > 1 { l as f64 / (n_band - 1) as f64 } else { 0.0 };
            fwhm_ps.0 + f * (fwhm_ps.1 - fwhm_ps.0)
        })
        .collect();
    ImpulseResponseSet::gaussian(n_bin, bin_ps, eta, &fwhm, delays)
}

/// Amplitude profile with a mild dip toward the middle bands.
pub fn default_eta(n_band: usize) -> Vec<f64> {
    (0..n_band).map(|l| 1.0 - 0.3 * (std::f64::consts::PI * l as f64 / n_band.max(2) as f64).sin()).collect()
}

/// Band delays of `0, 1, 2, 0, 1, 2, ...` bins.
pub fn default_delays(n_band: usize) -> Vec<f64> {
    (0..n_band).map(|l| (l % 3) as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub cube: PhotonCube,
    /// Factor applied to the responses to reach the budget.
    pub gain: f64,
    /// The input responses scaled by `gain`; the ones the cube was drawn with.
    pub irf: ImpulseResponseSet,
    /// Spectra `M a + r`, `[pixel][band]`.
    pub lambda: Vec<f64>,
}

/// Draws `y[p,l,t] ~ Poisson(λ[p,l] gain g_l(t − t_p − d_p))`. The gain is
/// the one for which the expected number of photons per pixel and band
/// equals `budget`; it scales the responses, so abundances and anomaly
/// values keep the scale of the scene.
pub fn simulate_cube(scene: &SyntheticScene, lib: &EndmemberLibrary, irf: &ImpulseResponseSet, budget: f64, seed: u64) -> Result<Simulated> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::invalid(format!("photon budget must be positive, got {budget}")));
    }
    let dims = scene.dims;
    if irf.n_band() != dims.n_band || irf.n_bin() != dims.n_bin || lib.n_band() != dims.n_band {
        return Err(Error::invalid("responses or library do not match the scene"));
    }
    let (n, l_n, r_n) = (dims.n_pixels(), dims.n_band, scene.n_endmember);
    let mut lambda = vec![0.0; n * l_n];
    let mut expected = 0.0;
    for p in 0..n {
        lib.mix_into(&scene.a[p * r_n..(p + 1) * r_n], &mut lambda[p * l_n..(p + 1) * l_n]);
        for l in 0..l_n {
            let k = p * l_n + l;
            lambda[k] += scene.r[k];
            expected += lambda[k] * irf.kernel(l).windowed_sum(scene.t[p] as i64 + irf.delay(p), dims.n_bin);
        }
    }
    if !(expected > 0.0) {
        return Err(Error::invalid("scene produces no signal"));
    }
    let gain = budget * (n * l_n) as f64 / expected;

    let per_pixel: Vec<Vec<Entry>> = par::map_range(n, |p| {
        let (row, col) = (p / dims.n_col, p % dims.n_col);
        let shift = scene.t[p] as i64 + irf.delay(p);
        let mut out = Vec::new();
        for l in 0..l_n {
            let lam = lambda[p * l_n + l];
            let k = irf.kernel(l);
            let gt = k.windowed_sum(shift, dims.n_bin);
            let mu = lam * gain * gt;
            if !(mu > 0.0) {
                continue;
            }
            let mut rng = site_rng(seed, 0, Stage::ScenePhotons, (p * l_n + l) as u64);
            let total = Poisson::new(mu).map(|d| d.sample(&mut rng) as u64).unwrap_or(0);
            if total == 0 {
                continue;
            }
            let lo = (1 - shift).max(k.first_lag);
            let hi = (dims.n_bin as i64 - shift).min(k.last_lag());
            let mut cdf = Vec::with_capacity((hi - lo + 1) as usize);
            let mut acc = 0.0;
            for lag in lo..=hi {
                acc += k.at(lag);
                cdf.push(acc);
            }
            let mut counts = vec![0u32; cdf.len()];
            for _ in 0..total {
                let u = rng.uniform() * acc;
                let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                counts[idx] += 1;
            }
            for (idx, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let bin = (lo + idx as i64 + shift) as usize;
                    out.push(Entry { row, col, band: l, bin, count: c });
                }
            }
        }
        out
    });
    let cube = PhotonCube::from_entries(dims, per_pixel.into_iter().flatten())?;
    Ok(Simulated { cube, gain, irf: irf.scaled(gain)?, lambda })
}

/// Keeps each photon independently with probability `keep`.
pub fn thin_cube(cube: &PhotonCube, keep: f64, seed: u64) -> Result<PhotonCube> {
    if !(0.0..=1.0).contains(&keep) {
        return Err(Error::invalid(format!("keep probability must lie in [0, 1], got {keep}")));
    }
    let entries: Vec<Entry> = cube
        .entries()
        .enumerate()
        .filter_map(|(k, mut e)| {
            let mut rng = site_rng(seed, 0, Stage::Thinning, k as u64);
            let b = Binomial::new(e.count as u64, keep).ok()?;
            e.count = b.sample(&mut rng) as u32;
            (e.count > 0).then_some(e)
        })
        .collect();
    PhotonCube::from_entries(*cube.dims(), entries)
}
