//! Plain-text file formats, map products, run configuration and
//! checkpoints.

mod checkpoint;
mod config;
mod cube;
mod irf;
mod library;
mod maps;

use std::fs;
use std::path::Path;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointFile};
pub use config::{parse_config, read_config, RunConfig, CONFIG_KEYS};
pub use cube::{format_cube, parse_cube, read_cube, write_cube};
pub use irf::{format_irf, parse_irf, read_delays, read_irf, write_delays, write_irf};
pub use library::{format_endmembers, parse_endmembers, read_endmembers, write_endmembers};
pub use maps::{read_matrix, write_maps, write_matrix, write_pgm, MapScale, ABUNDANCE_DISPLAY_MAX};

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, msg: msg.into() }
}

pub(crate) fn field<T: std::str::FromStr>(path: &str, line: usize, name: &str, s: Option<&str>) -> Result<T> {
    let s = s.ok_or_else(|| parse_err(path, line, format!("missing {name}")))?;
    s.parse().map_err(|_| parse_err(path, line, format!("{name} is not a valid number: {s:?}")))
}
