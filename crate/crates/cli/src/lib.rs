//! Figure presets, configurable sweeps and run bookkeeping on top of
//! [`mesoherald`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
mod error;
pub mod manifest;
pub mod preset;
pub mod run;

pub use compare::{compare, DiffReport};
pub use config::{Conditioning, ExperimentConfig};
pub use error::{CliError, Result};
pub use manifest::RunManifest;
pub use preset::preset;
pub use run::run;

/// Thread-count override for the global pool.
pub const THREADS_ENV: &str = "MESOHERALD_THREADS";

pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(vec![format!("{THREADS_ENV} = `{raw}` is not a positive integer")]))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
