//! Grid file schema and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::court::{DEPTH_CELLS, NUM_CELLS, WIDTH_CELLS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValues {
    Single(Vec<f64>),
    Draws(Vec<Vec<f64>>),
}

/// One surface over the half-court grid, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub player_id: Option<String>,
    pub lineup: Option<String>,
    pub kind: String,
    pub width: usize,
    pub depth: usize,
    pub values: GridValues,
}

impl GridFile {
    pub fn single(kind: impl Into<String>, player: Option<String>, lineup: Option<String>, values: Vec<f64>) -> Self {
        GridFile {
            player_id: player,
            lineup,
            kind: kind.into(),
            width: WIDTH_CELLS,
            depth: DEPTH_CELLS,
            values: GridValues::Single(values),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width * self.depth != NUM_CELLS {
            return Err(Error::Dimension(format!(
                "grid `{}` is {}x{}, expected {WIDTH_CELLS}x{DEPTH_CELLS}",
                self.kind, self.width, self.depth
            )));
        }
        let rows: Vec<&Vec<f64>> = match &self.values {
            GridValues::Single(v) => vec![v],
            GridValues::Draws(d) => d.iter().collect(),
        };
        for row in rows {
            if row.len() != NUM_CELLS {
                return Err(Error::Dimension(format!(
                    "grid `{}` has {} values, expected {NUM_CELLS}",
                    self.kind,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("grid `{}` has non-finite values", self.kind)));
            }
        }
        Ok(())
    }

    /// The single-surface values; errors on draw files.
    pub fn surface(&self) -> Result<&[f64]> {
        match &self.values {
            GridValues::Single(v) => Ok(v),
            GridValues::Draws(_) => Err(Error::validation(format!("grid `{}` holds draws, not a surface", self.kind))),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: GridFile = serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        file.validate()
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// Writes via a temporary sibling and a rename so readers never observe a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Serializes CSV output in memory and writes it atomically.
pub fn write_csv_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}
