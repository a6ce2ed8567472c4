//! Map products: one CSV matrix per product plus 16-bit PGM quicklooks.
//!
//! | file | content | PGM scale |
//! |------|---------|-----------|
//! | `depth_bins.csv` | MMAP depth bin | none |
//! | `depth_mm.csv` | depth relative to the support start, mm | map min to max |
//! | `confidence.csv` | posterior mass of the depth bin | `[0, 1]` |
//! | `abundance_<r>.csv` | MMSE abundance of endmember `r` (1-based) | `[0, 1.3]` |
//! | `anomaly_log_intensity.csv` | `log(‖r̂‖² / L)` | `[−12, 4]` |
//! | `labels.csv`, `anomalies.csv` | `ẑ`, `r̂`; column `j L + l` | none |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{parse_err, read_text, write_text};
use crate::error::{Error, Result};
use crate::estimators::{EstimateBundle, ANOMALY_LOG_FLOOR};

/// Top of the display range of abundance quicklooks.
pub const ABUNDANCE_DISPLAY_MAX: f64 = 1.3;
const ANOMALY_DISPLAY_MAX: f64 = 4.0;

/// Value range mapped onto `0..=65535`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapScale {
    Fixed(f64, f64),
    /// Minimum to maximum of the map itself.
    Auto,
}

pub fn write_matrix<T: ToString>(path: &Path, values: &[T], n_row: usize, n_col: usize) -> Result<()> {
    if values.len() != n_row * n_col {
        return Err(Error::invalid(format!("matrix has {} values, expected {n_row}x{n_col}", values.len())));
    }
    let mut s = String::new();
    for row in values.chunks(n_col) {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    write_text(path, &s)
}

/// Reads a numeric CSV matrix: `(n_row, n_col, values)`.
pub fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let p = path.display().to_string();
    let text = read_text(path)?;
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut n_col = 0;
    let mut n_row = 0;
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(&p, k + 1, e.to_string()))?;
        if k == 0 {
            n_col = rec.len();
        }
        for cell in rec.iter() {
            values.push(cell.parse().map_err(|_| parse_err(&p, k + 1, format!("non-numeric cell {cell:?}")))?);
        }
        n_row += 1;
    }
    Ok((n_row, n_col, values))
}

/// Binary 16-bit PGM, big-endian samples.
pub fn write_pgm(path: &Path, values: &[f64], n_row: usize, n_col: usize, scale: MapScale) -> Result<()> {
    let (lo, hi) = match scale {
        MapScale::Fixed(lo, hi) => (lo, hi),
        MapScale::Auto => values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
    };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut bytes = format!("P5\n{n_col} {n_row}\n65535\n").into_bytes();
    for &v in values {
        let q = (((v - lo) / span).clamp(0.0, 1.0) * 65535.0).round() as u16;
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes every product of `bundle` into `dir`, creating it if needed.
/// Returns the paths written.
pub fn write_maps(bundle: &EstimateBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    if let Some(v) = bundle.confidence.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfRange(format!("confidence value {v} outside [0, 1]")));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (nr, nc, nb, ne) = (bundle.n_row, bundle.n_col, bundle.n_band, bundle.n_endmember);
    let mut out = Vec::new();
    let mut put = |name: &str| {
        let p = dir.join(name);
        out.push(p.clone());
        p
    };
    write_matrix(&put("depth_bins.csv"), &bundle.depth_bins, nr, nc)?;
    write_matrix(&put("depth_mm.csv"), &bundle.depth_mm, nr, nc)?;
    write_pgm(&put("depth_mm.pgm"), &bundle.depth_mm, nr, nc, MapScale::Auto)?;
    write_matrix(&put("confidence.csv"), &bundle.confidence, nr, nc)?;
    write_pgm(&put("confidence.pgm"), &bundle.confidence, nr, nc, MapScale::Fixed(0.0, 1.0))?;
    for r in 0..ne {
        let map: Vec<f64> = bundle.abundances.iter().skip(r).step_by(ne).copied().collect();
        write_matrix(&put(&format!("abundance_{}.csv", r + 1)), &map, nr, nc)?;
        write_pgm(&put(&format!("abundance_{}.pgm", r + 1)), &map, nr, nc, MapScale::Fixed(0.0, ABUNDANCE_DISPLAY_MAX))?;
    }
    write_matrix(&put("anomaly_log_intensity.csv"), &bundle.anomaly_log_intensity, nr, nc)?;
    write_pgm(
        &put("anomaly_log_intensity.pgm"),
        &bundle.anomaly_log_intensity,
        nr,
        nc,
        MapScale::Fixed(ANOMALY_LOG_FLOOR, ANOMALY_DISPLAY_MAX),
    )?;
    write_matrix(&put("labels.csv"), &bundle.labels, nr, nc * nb)?;
    write_matrix(&put("anomalies.csv"), &bundle.anomalies, nr, nc * nb)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(conf: f64) -> EstimateBundle {
        EstimateBundle {
            n_row: 1,
            n_col: 2,
            n_band: 2,
            n_endmember: 1,
            depth_bins: vec![3, 4],
            depth_mm: vec![0.0, 0.3],
            confidence: vec![conf, 0.5],
            abundances: vec![1.3, 0.0],
            labels: vec![0, 1, 0, 0],
            anomalies: vec![0.0, 0.25, 0.0, 0.0],
            anomaly_log_intensity: vec![-3.0, ANOMALY_LOG_FLOOR],
        }
    }

    #[test]
    fn abundance_top_of_scale_is_white() {
        let dir = tempfile::tempdir().unwrap();
        write_maps(&bundle(1.0), dir.path()).unwrap();
        let bytes = fs::read(dir.path().join("abundance_1.pgm")).unwrap();
        let header = b"P5\n2 1\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0xff, 0xff, 0, 0]);
        let (r, c, v) = read_matrix(&dir.path().join("labels.csv")).unwrap();
        assert_eq!((r, c, v), (1, 4, vec![0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn confidence_outside_unit_interval_refused() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(write_maps(&bundle(1.2), dir.path()), Err(Error::OutOfRange(_))));
        assert!(!dir.path().join("depth_mm.csv").exists());
    }
}
