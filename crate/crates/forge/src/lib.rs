//! Experiment runner for `mikado-core`: configuration, the TFLD field
//! container, deterministic JSON/CSV reports and the experiments themselves.

pub mod config;
pub mod experiments;
pub mod report;
pub mod tfld;

pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run, ForgeError};
pub use report::{Check, CsvTable, DirSink, MemSink, Report, Sink, Status};

/// Caps the global rayon pool at `MF_THREADS` when the variable is set.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("MF_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("MF_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}
