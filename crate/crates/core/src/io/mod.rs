//! Map files, annotation/prediction CSVs and overlay images.

pub mod npy;
pub mod overlay;
pub mod pgm;
pub mod records;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::SaliencyMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Npy,
    Pgm,
}

impl MapFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("npy") => Ok(MapFormat::Npy),
            Some("pgm") => Ok(MapFormat::Pgm),
            _ => Err(Error::format(path, "unsupported map file extension (expected .npy or .pgm)")),
        }
    }
}

/// Reads a map, choosing the decoder from the file extension.
pub fn load_map(path: impl AsRef<Path>) -> Result<SaliencyMap> {
    let path = path.as_ref();
    let format = MapFormat::from_path(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = match format {
        MapFormat::Npy => npy::decode(&bytes),
        MapFormat::Pgm => pgm::decode(&bytes),
    };
    decoded.map_err(|message| Error::format(path, message))
}

/// Writes a map; NPY stores float32, PGM quantizes to 8 bits.
pub fn save_map(map: &SaliencyMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match MapFormat::from_path(path)? {
        MapFormat::Npy => npy::encode_f32(map),
        MapFormat::Pgm => pgm::encode(map),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
