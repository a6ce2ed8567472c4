//! `MSLCUBE 1` sparse photon-count files.
//!
//! ```text
//! MSLCUBE 1 <n_row> <n_col> <L> <T> <bin_ps>
//! <i> <j> <l> <t> <count>      one line per nonzero entry
//! ```
//!
//! Indices are 1-based and entries appear in ascending `(i, j, l, t)`
//! order.

use std::fmt::Write as _;
use std::path::Path;

use super::{field, parse_err, read_text, write_text};
use crate::cube::{Entry, PhotonCube};
use crate::error::Result;
use crate::grid::GridDims;

pub fn format_cube(cube: &PhotonCube) -> String {
    let d = cube.dims();
    let mut s = format!("MSLCUBE 1 {} {} {} {} {}\n", d.n_row, d.n_col, d.n_band, d.n_bin, d.bin_ps);
    for e in cube.entries() {
        let _ = writeln!(s, "{} {} {} {} {}", e.row + 1, e.col + 1, e.band + 1, e.bin, e.count);
    }
    s
}

pub fn parse_cube(text: &str, path: &str) -> Result<PhotonCube> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let mut h = header.split_whitespace();
    if h.next() != Some("MSLCUBE") || h.next() != Some("1") {
        return Err(parse_err(path, hl, "header must start with `MSLCUBE 1`"));
    }
    let n_row: usize = field(path, hl, "n_row", h.next())?;
    let n_col: usize = field(path, hl, "n_col", h.next())?;
    let n_band: usize = field(path, hl, "L", h.next())?;
    let n_bin: usize = field(path, hl, "T", h.next())?;
    let bin_ps: f64 = field(path, hl, "bin_ps", h.next())?;
    if h.next().is_some() {
        return Err(parse_err(path, hl, "trailing fields in header"));
    }
    let dims = GridDims::new(n_row, n_col, n_band, n_bin, bin_ps).map_err(|e| parse_err(path, hl, e.to_string()))?;

    let mut entries = Vec::new();
    let mut last: Option<(usize, usize, usize, usize)> = None;
    for (ln, line) in lines {
        let mut f = line.split_whitespace();
        let i: usize = field(path, ln, "row", f.next())?;
        let j: usize = field(path, ln, "column", f.next())?;
        let l: usize = field(path, ln, "band", f.next())?;
        let t: usize = field(path, ln, "bin", f.next())?;
        let c: i64 = field(path, ln, "count", f.next())?;
        if f.next().is_some() {
            return Err(parse_err(path, ln, "expected 5 fields"));
        }
        if c < 0 {
            return Err(parse_err(path, ln, format!("negative count {c}")));
        }
        if c > u32::MAX as i64 {
            return Err(parse_err(path, ln, format!("count {c} too large")));
        }
        if !(1..=n_row).contains(&i) || !(1..=n_col).contains(&j) || !(1..=n_band).contains(&l) || !(1..=n_bin).contains(&t) {
            return Err(parse_err(path, ln, format!("index ({i}, {j}, {l}, {t}) outside {n_row}x{n_col}x{n_band}x{n_bin}")));
        }
        let key = (i, j, l, t);
        if last.is_some_and(|p| p >= key) {
            return Err(parse_err(path, ln, "entries are not in strictly ascending order"));
        }
        last = Some(key);
        entries.push(Entry { row: i - 1, col: j - 1, band: l - 1, bin: t, count: c as u32 });
    }
    PhotonCube::from_entries(dims, entries)
}

pub fn read_cube(path: &Path) -> Result<PhotonCube> {
    parse_cube(&read_text(path)?, &path.display().to_string())
}

pub fn write_cube(path: &Path, cube: &PhotonCube) -> Result<()> {
    write_text(path, &format_cube(cube))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn dims() -> GridDims {
        GridDims::new(2, 3, 2, 10, 2.5).unwrap()
    }

    #[test]
    fn empty_cube_is_header_only() {
        assert_eq!(format_cube(&PhotonCube::empty(dims())), "MSLCUBE 1 2 3 2 10 2.5\n");
    }

    #[test]
    fn round_trip() {
        let e = [Entry { row: 1, col: 2, band: 1, bin: 10, count: 4 }, Entry { row: 0, col: 0, band: 0, bin: 1, count: 1 }];
        let cube = PhotonCube::from_entries(dims(), e).unwrap();
        let text = format_cube(&cube);
        assert_eq!(text, "MSLCUBE 1 2 3 2 10 2.5\n1 1 1 1 1\n2 3 2 10 4\n");
        let back = parse_cube(&text, "x").unwrap();
        assert_eq!(back, cube);
        assert_eq!(back.totals(), cube.totals());
    }

    #[test]
    fn negative_count_names_line() {
        let err = parse_cube("MSLCUBE 1 2 3 2 10 2\n1 1 1 1 2\n1 1 1 2 -1\n", "c.txt").unwrap_err();
        let Error::Parse { line, .. } = &err else { panic!("{err}") };
        assert_eq!(*line, 3);
        assert!(err.to_string().starts_with("c.txt:3:"));
    }

    #[test]
    fn bad_files_rejected() {
        assert!(parse_cube("MSLCUBE 2 2 3 2 10 2\n", "x").is_err());
        assert!(parse_cube("MSLCUBE 1 2 3 2 10 2\n3 1 1 1 1\n", "x").is_err());
        assert!(parse_cube("MSLCUBE 1 2 3 2 10 2\n1 1 1 2 1\n1 1 1 1 1\n", "x").is_err());
        assert!(parse_cube("MSLCUBE 1 2 3 2 10 2\n1 1 1 2 1\n1 1 1 2 1\n", "x").is_err());
        assert!(parse_cube("MSLCUBE 1 2 3 2 10 2\n1 1 1 2\n", "x").is_err());
    }
}
