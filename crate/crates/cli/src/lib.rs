//! Batch front-end of the `polydg` solver: JSON run configs, convergence
//! suites, physical demos and their CSV / VTK artifacts.

pub mod commands;
pub mod config;
pub mod demos;
pub mod output;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{run_config, RunOptions, RunSummary};

/// Sizes the global thread pool from `POLYDG_THREADS`, if set.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("POLYDG_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("POLYDG_THREADS must be a positive integer, got '{v}'"))?;
        anyhow::ensure!(n >= 1, "POLYDG_THREADS must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
