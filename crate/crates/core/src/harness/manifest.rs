//! Run manifests: what was run, with which settings, and checksums of every
//! output file.

use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, SCHEMA_VERSION};
use super::experiments::{run_experiment, OutputFile, RunOutput};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub crate_version: String,
    pub schema_version: u32,
    pub target_os: String,
    pub target_arch: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            schema_version: SCHEMA_VERSION,
            target_os: std::env::consts::OS.into(),
            target_arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    /// Normalized config, loadable with [`ExperimentConfig::from_toml`].
    pub config: String,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub wall_clock_secs: f64,
    pub threads: usize,
    pub versions: Versions,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digests(files: &[OutputFile]) -> Vec<FileDigest> {
    files
        .iter()
        .map(|f| FileDigest { name: f.name.clone(), bytes: f.contents.len() as u64, sha256: sha256_hex(f.contents.as_bytes()) })
        .collect()
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Writes the outputs and their manifest into the config's output directory.
pub fn write_run(cfg: &ExperimentConfig, out: &RunOutput, started: SystemTime, elapsed: Duration) -> Result<Manifest> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_at(dir, e))?;
    for f in &out.files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.contents).map_err(|e| io_at(&path, e))?;
    }
    let manifest = Manifest {
        experiment: cfg.experiment.name().into(),
        seed: cfg.seed,
        config: cfg.to_toml(),
        started_at: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        wall_clock_secs: elapsed.as_secs_f64(),
        threads: rayon::current_num_threads(),
        versions: Versions::current(),
        files: digests(&out.files),
    };
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| io_at(&path, e))?;
    Ok(manifest)
}

/// Runs `cfg` and writes its outputs.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(RunOutput, Manifest)> {
    let started = SystemTime::now();
    let clock = std::time::Instant::now();
    let out = run_experiment(cfg)?;
    let manifest = write_run(cfg, &out, started, clock.elapsed())?;
    Ok((out, manifest))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| io_at(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Files whose content on disk no longer matches the manifest.
pub fn check_files(dir: &Path, manifest: &Manifest) -> Vec<String> {
    let mut bad = Vec::new();
    for f in &manifest.files {
        let path: PathBuf = dir.join(&f.name);
        match std::fs::read(&path) {
            Ok(data) if sha256_hex(&data) == f.sha256 => {}
            Ok(_) => bad.push(format!("{} differs from its recorded checksum", f.name)),
            Err(e) => bad.push(format!("{}: {e}", f.name)),
        }
    }
    bad
}

/// Reruns the recorded config in memory and lists every output whose
/// checksum differs from the manifest.
pub fn verify_manifest(manifest: &Manifest) -> Result<Vec<String>> {
    let cfg = ExperimentConfig::from_toml(&manifest.config)?;
    let fresh = digests(&run_experiment(&cfg)?.files);
    let mut bad = Vec::new();
    for f in &manifest.files {
        match fresh.iter().find(|g| g.name == f.name) {
            Some(g) if g.sha256 == f.sha256 => {}
            Some(_) => bad.push(format!("{} differs on rerun", f.name)),
            None => bad.push(format!("{} was not produced on rerun", f.name)),
        }
    }
    for g in &fresh {
        if !manifest.files.iter().any(|f| f.name == g.name) {
            bad.push(format!("{} is missing from the manifest", g.name));
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
