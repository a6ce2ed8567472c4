//! Endmember CSV: a `wavelength_nm` column followed by one named column
//! per endmember, one row per band.

use std::path::Path;

use super::{parse_err, read_text, write_text};
use crate::error::Result;
use crate::library::EndmemberLibrary;

pub fn format_endmembers(lib: &EndmemberLibrary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["wavelength_nm".to_string()];
    header.extend(lib.names().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for l in 0..lib.n_band() {
        let mut rec = vec![lib.wavelengths_nm()[l].to_string()];
        rec.extend(lib.row(l).iter().map(|v| v.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn parse_endmembers(text: &str, path: &str) -> Result<EndmemberLibrary> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    if header.get(0) != Some("wavelength_nm") {
        return Err(parse_err(path, 1, "first column must be `wavelength_nm`"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(parse_err(path, 1, "no endmember columns"));
    }
    let mut wl = Vec::new();
    let mut m = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(path, line, e.to_string()))?;
        if rec.len() != names.len() + 1 {
            return Err(parse_err(path, line, format!("expected {} cells, found {}", names.len() + 1, rec.len())));
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| parse_err(path, line, format!("non-numeric cell {cell:?} in column {}", c + 1)))?;
            if c == 0 {
                wl.push(v);
            } else {
                m.push(v);
            }
        }
    }
    let n_band = wl.len();
    EndmemberLibrary::new(n_band, names.len(), m, names, wl).map_err(|e| parse_err(path, 1, e.to_string()))
}

pub fn read_endmembers(path: &Path) -> Result<EndmemberLibrary> {
    parse_endmembers(&read_text(path)?, &path.display().to_string())
}

pub fn write_endmembers(path: &Path, lib: &EndmemberLibrary) -> Result<()> {
    write_text(path, &format_endmembers(lib))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_by_thirty_three_round_trips() {
        let (l, r) = (33, 15);
        let m: Vec<f64> = (0..l * r).map(|k| ((k * 7919) % 1000) as f64 / 997.0 + 1e-3 / 3.0).collect();
        let names = (0..r).map(|k| format!("clay {k}")).collect();
        let wl = (0..l).map(|k| 500.0 + 10.0 * k as f64).collect();
        let lib = EndmemberLibrary::new(l, r, m, names, wl).unwrap();
        let back = parse_endmembers(&format_endmembers(&lib), "x").unwrap();
        assert_eq!(back, lib);
    }

    #[test]
    fn non_numeric_cell_rejected() {
        let err = parse_endmembers("wavelength_nm,a\n500,0.1\n510,abc\n", "lib.csv").unwrap_err();
        assert!(err.to_string().contains("lib.csv:3"), "{err}");
    }
}
