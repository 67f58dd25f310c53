//! Library surface of the `asq` binary: configuration, persistence
//! formats and the subcommand implementations, kept callable so
//! integration tests can drive them without spawning processes.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use error::{CliError, Result};

/// Worker-thread cap from the ASQ_THREADS environment variable (>= 1).
pub fn thread_cap() -> usize {
    std::env::var("ASQ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}
