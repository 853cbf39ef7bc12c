//! Atomic artifact writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::spec::ExperimentSpec;

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Resolved destinations of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactPlan {
    pub csv: PathBuf,
    pub json: PathBuf,
}

impl ArtifactPlan {
    /// Relative paths and the defaults `<command>.csv`, `<command>.json`
    /// land in `out`.
    pub fn new(spec: &ExperimentSpec, out: &Path) -> Self {
        let name = spec.command().as_str();
        let resolve = |p: &Option<PathBuf>, ext: &str| match p {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => out.join(p),
            None => out.join(format!("{name}.{ext}")),
        };
        Self {
            csv: resolve(&spec.output.csv, "csv"),
            json: resolve(&spec.output.json, "json"),
        }
    }

    /// Serializes everything first, then renames each file into place.
    pub fn write(&self, csv: Option<&str>, report: &serde_json::Value) -> anyhow::Result<()> {
        let mut json = serde_json::to_string_pretty(report)?;
        json.push('\n');
        if let Some(text) = csv {
            write_atomic(&self.csv, text.as_bytes())?;
        }
        write_atomic(&self.json, json.as_bytes())?;
        Ok(())
    }
}
