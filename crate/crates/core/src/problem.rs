use crate::cube::PhotonCube;
use crate::error::{Result, ValidationError, Violation};
use crate::grid::DepthSupport;
use crate::irf::{BandResponse, ImpulseResponseSet};
use crate::library::EndmemberLibrary;
use crate::likelihood::{build_suff_stats, SuffStats};

/// A checked set of inputs together with its look-up tables.
#[derive(Debug, Clone)]
pub struct Problem {
    pub cube: PhotonCube,
    pub lib: EndmemberLibrary,
    pub irf: ImpulseResponseSet,
    pub sup: DepthSupport,
    pub stats: SuffStats,
}

/// Checks that cube, library, responses and depth support agree, listing
/// every violation found rather than stopping at the first.
pub fn validate_inputs(
    cube: PhotonCube,
    lib: EndmemberLibrary,
    irf: ImpulseResponseSet,
    sup: DepthSupport,
) -> Result<Problem> {
    let dims = *cube.dims();
    let mut v = Vec::new();
    if lib.n_band() != dims.n_band {
        v.push(Violation::BandCountMismatch { what: "endmember library", expected: dims.n_band, found: lib.n_band() });
    }
    if irf.n_band() != dims.n_band {
        v.push(Violation::BandCountMismatch { what: "impulse responses", expected: dims.n_band, found: irf.n_band() });
    }
    if irf.n_bin() != dims.n_bin {
        v.push(Violation::BinCountMismatch { what: "impulse responses", expected: dims.n_bin, found: irf.n_bin() });
    }
    if let Some(k) = lib.matrix().iter().position(|m| *m < 0.0) {
        v.push(Violation::NegativeEntry { what: "endmember library", index: k, value: lib.matrix()[k] });
    }
    for b in irf.bands() {
        if let BandResponse::Dense(g) = b {
            if let Some(k) = g.iter().position(|x| *x < 0.0) {
                v.push(Violation::NegativeEntry { what: "impulse response", index: k, value: g[k] });
            }
        }
    }
    if let Some(d) = irf.delays() {
        if d.len() != dims.n_pixels() {
            v.push(Violation::Other(format!(
                "delay map has {} entries, expected {} pixels",
                d.len(),
                dims.n_pixels()
            )));
        }
    }
    if !sup.fits(dims.n_bin) {
        v.push(Violation::EmptyDepthSupport { t_min: sup.t_min, t_max: sup.t_max, n_bin: dims.n_bin });
    }
    if !v.is_empty() {
        return Err(ValidationError { violations: v }.into());
    }
    let stats = build_suff_stats(&cube, &irf, sup);
    Ok(Problem { cube, lib, irf, sup, stats })
}

impl Problem {
    /// Depth support from the default margin rule.
    pub fn default_support(irf: &ImpulseResponseSet) -> Result<DepthSupport> {
        DepthSupport::with_margin(irf.n_bin(), irf.truncation_margin())
    }
}
