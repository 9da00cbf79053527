//! Plain-text field snapshots and atomic file writes.
//!
//! Snapshot format: a header line `nx ny t`, then `nx` lines of `ny` values
//! (row-major, y fastest). Values use 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Array2<f64>,
}

impl Snapshot {
    pub fn to_text(&self) -> String {
        let (nx, ny) = self.field.dim();
        let mut out = String::with_capacity(nx * ny * 25 + 64);
        writeln!(out, "{nx} {ny} {:.16e}", self.time).expect("writing to a String");
        for column in self.field.rows() {
            let mut first = true;
            for v in column {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{v:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format. The step index is not stored in the file.
    pub fn parse(text: &str, step: usize) -> std::result::Result<Self, String> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| tokens.next().ok_or_else(|| format!("missing {what}"));
        let nx: usize = next("nx")?.parse().map_err(|e| format!("nx: {e}"))?;
        let ny: usize = next("ny")?.parse().map_err(|e| format!("ny: {e}"))?;
        let time: f64 = next("t")?.parse().map_err(|e| format!("t: {e}"))?;
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            let v = next("value")?;
            values.push(v.parse::<f64>().map_err(|e| format!("value {v:?}: {e}"))?);
        }
        if tokens.next().is_some() {
            return Err("trailing data after field values".into());
        }
        let field = Array2::from_shape_vec((nx, ny), values).map_err(|e| e.to_string())?;
        Ok(Snapshot { step, time, field })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read(path: impl AsRef<Path>, step: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, step).map_err(|reason| Error::Parse {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn file_name(&self) -> String {
        format!("snap_{}.txt", self.step)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers see either the whole file or none.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
