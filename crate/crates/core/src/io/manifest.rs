use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::save_config;
use crate::error::{Error, Result};
use crate::ExperimentConfig;

/// Provenance attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical SI serialization of the resolved configuration.
    pub config_digest: Option<String>,
    pub tool_version: String,
    pub command: String,
    /// UTC, RFC 3339 with second precision.
    pub timestamp: String,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(
        tool_version: impl Into<String>,
        command: impl Into<String>,
        config: Option<&ExperimentConfig>,
        inputs: &[PathBuf],
        seed: Option<u64>,
    ) -> Self {
        Self {
            config_digest: config.map(config_digest),
            tool_version: tool_version.into(),
            command: command.into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            seed,
        }
    }
}

/// Hex digest that changes iff a resolved configuration value changes.
pub fn config_digest(config: &ExperimentConfig) -> String {
    let hash = Sha256::digest(save_config(config).as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Path of the manifest written next to a data file: `curve.csv` → `curve.csv.manifest.json`.
pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_tracks_values() {
        let a = ExperimentConfig::c70_reference();
        let mut b = a.clone();
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a).len(), 64);
        b.recoil_laser.power = f64::from_bits(b.recoil_laser.power.to_bits() + 1);
        assert_ne!(config_digest(&a), config_digest(&b));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert_eq!(sidecar_path(&p).file_name().unwrap(), "out.csv.manifest.json");
    }

    #[test]
    fn manifest_serializes() {
        let m = RunManifest::new("0.1.0", "dmin", Some(&ExperimentConfig::c70_reference()), &[], Some(4));
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["seed"], 4);
        assert!(v["timestamp"].as_str().unwrap().ends_with('Z'));
    }
}
