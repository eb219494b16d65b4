//! Reproducible experiment runs: configs, runners, CSV outputs, manifests,
//! and acceptance checks.

pub mod config;
pub mod criteria;
pub mod experiments;
pub mod manifest;
pub mod settings;

pub use config::{Experiment, ExperimentConfig, SCHEMA_VERSION};
pub use criteria::{evaluate, CriterionResult};
pub use experiments::{run_experiment, OutputFile, Report, RunOutput};
pub use manifest::{check_files, read_manifest, run_and_write, verify_manifest, write_run, Manifest, MANIFEST_FILE};
pub use settings::Settings;

use crate::error::{Error, Result};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "DLPHY_THREADS";

/// Sizes the global worker pool. Results do not depend on the count; only
/// the wall-clock does. Fails if the pool was already started.
pub fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::Config(vec!["thread count must be at least 1".into()]));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::State(format!("cannot size the worker pool: {e}")))
}

pub fn worker_threads() -> usize {
    rayon::current_num_threads()
}
