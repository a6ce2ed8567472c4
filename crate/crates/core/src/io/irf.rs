//! Impulse-response files, dense or parametric:
//!
//! ```text
//! IRF 1 <L> <T>                 IRFGAUSS 1 <L>
//! <T values>    x L             <eta> <mu_bins> <sigma_bins> <delay_bins>    x L
//! ```
//!
//! An optional delay map (`DELAYS 1 <n_row> <n_col>` followed by `n_row`
//! rows of integer bin delays) sits in a separate file.

use std::fmt::Write as _;
use std::path::Path;

use super::{field, parse_err, read_text, write_text};
use crate::error::Result;
use crate::irf::{BandResponse, ImpulseResponseSet};

/// Gaussian sets are written parametrically, anything else densely.
pub fn format_irf(irf: &ImpulseResponseSet) -> String {
    let gaussian = irf.bands().iter().all(|b| matches!(b, BandResponse::Gaussian { .. }));
    let mut s = String::new();
    if gaussian {
        let _ = writeln!(s, "IRFGAUSS 1 {}", irf.n_band());
        for b in irf.bands() {
            if let BandResponse::Gaussian { eta, mu, sigma, delay } = b {
                let _ = writeln!(s, "{eta} {mu} {sigma} {delay}");
            }
        }
    } else {
        let _ = writeln!(s, "IRF 1 {} {}", irf.n_band(), irf.n_bin());
        for l in 0..irf.n_band() {
            let row: Vec<String> = irf.dense(l).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    s
}

/// Parses either format; `n_bin` is the histogram length of the cube the
/// responses will be used with.
pub fn parse_irf(text: &str, path: &str, n_bin: usize) -> Result<ImpulseResponseSet> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let mut h = header.split_whitespace();
    let kind = h.next();
    if h.next() != Some("1") {
        return Err(parse_err(path, hl, "unsupported format version"));
    }
    let n_band: usize = field(path, hl, "L", h.next())?;
    let mut bands = Vec::with_capacity(n_band);
    match kind {
        Some("IRF") => {
            let t: usize = field(path, hl, "T", h.next())?;
            if t != n_bin {
                return Err(parse_err(path, hl, format!("bin-count mismatch: file has {t} bins, cube has {n_bin}")));
            }
            for _ in 0..n_band {
                let (ln, line) = lines.next().ok_or_else(|| parse_err(path, hl, format!("expected {n_band} response rows")))?;
                let v: Vec<f64> = line
                    .split_whitespace()
                    .map(|c| c.parse().map_err(|_| parse_err(path, ln, format!("non-numeric value {c:?}"))))
                    .collect::<Result<_>>()?;
                if v.len() != t {
                    return Err(parse_err(path, ln, format!("expected {t} values, found {}", v.len())));
                }
                bands.push(BandResponse::Dense(v));
            }
        }
        Some("IRFGAUSS") => {
            for _ in 0..n_band {
                let (ln, line) = lines.next().ok_or_else(|| parse_err(path, hl, format!("expected {n_band} response rows")))?;
                let mut f = line.split_whitespace();
                let eta = field(path, ln, "eta", f.next())?;
                let mu = field(path, ln, "mu", f.next())?;
                let sigma = field(path, ln, "sigma", f.next())?;
                let delay = field(path, ln, "delay", f.next())?;
                bands.push(BandResponse::Gaussian { eta, mu, sigma, delay });
            }
        }
        _ => return Err(parse_err(path, hl, "header must start with `IRF 1` or `IRFGAUSS 1`")),
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(path, ln, "unexpected extra rows"));
    }
    ImpulseResponseSet::new(n_bin, bands).map_err(|e| parse_err(path, hl, e.to_string()))
}

pub fn read_irf(path: &Path, n_bin: usize) -> Result<ImpulseResponseSet> {
    parse_irf(&read_text(path)?, &path.display().to_string(), n_bin)
}

pub fn write_irf(path: &Path, irf: &ImpulseResponseSet) -> Result<()> {
    write_text(path, &format_irf(irf))
}

pub fn read_delays(path: &Path) -> Result<Vec<i64>> {
    let p = path.display().to_string();
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(&p, 1, "empty file"))?;
    let mut h = header.split_whitespace();
    if h.next() != Some("DELAYS") || h.next() != Some("1") {
        return Err(parse_err(&p, hl, "header must start with `DELAYS 1`"));
    }
    let n_row: usize = field(&p, hl, "n_row", h.next())?;
    let n_col: usize = field(&p, hl, "n_col", h.next())?;
    let mut out = Vec::with_capacity(n_row * n_col);
    for (ln, line) in lines {
        for c in line.split_whitespace() {
            out.push(c.parse().map_err(|_| parse_err(&p, ln, format!("non-integer delay {c:?}")))?);
        }
    }
    if out.len() != n_row * n_col {
        return Err(parse_err(&p, hl, format!("expected {} delays, found {}", n_row * n_col, out.len())));
    }
    Ok(out)
}

pub fn write_delays(path: &Path, delays: &[i64], n_row: usize, n_col: usize) -> Result<()> {
    let mut s = format!("DELAYS 1 {n_row} {n_col}\n");
    for row in delays.chunks(n_col) {
        let r: Vec<String> = row.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "{}", r.join(" "));
    }
    write_text(path, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_round_trip() {
        let irf = ImpulseResponseSet::gaussian(200, 2.0, &[1.0, 0.7], &[60.0, 64.0], &[0.0, 1.5]).unwrap();
        let back = parse_irf(&format_irf(&irf), "x", 200).unwrap();
        assert_eq!(back, irf);
    }

    #[test]
    fn dense_round_trip() {
        let irf = ImpulseResponseSet::new(5, vec![BandResponse::Dense(vec![0.0, 0.1, 1.0 / 3.0, 0.2, 0.0])]).unwrap();
        let text = format_irf(&irf);
        assert!(text.starts_with("IRF 1 1 5\n"));
        assert_eq!(parse_irf(&text, "x", 5).unwrap(), irf);
        assert!(parse_irf(&text, "x", 6).is_err());
    }
}
