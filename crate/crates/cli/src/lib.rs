//! Experiment harness for the `sdiv` library: bound grids, contamination
//! sweeps, scenario bounds and randomized inequality checks, each written
//! as a deterministic CSV file.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use commands::{cmd_bound_grid, cmd_check, cmd_scenario_bound, cmd_sweep, run};
pub use config::{Command, Grid, RunConfig};
pub use output::{render, Table};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SDIV_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => exit::USAGE,
            CliError::Numeric(_) => exit::NUMERIC,
        }
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NUMERIC: i32 = 2;
    pub const VIOLATION: i32 = 3;
}

/// Where the CSV goes: `None` for standard output.
pub fn output_path(cfg: &RunConfig) -> Option<PathBuf> {
    match cfg.out.as_deref() {
        Some("-") => None,
        Some(p) => Some(PathBuf::from(p)),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            Some(dir.join(format!("sdiv-{}.csv", cfg.command.as_str())))
        }
    }
}

/// Runs a config, writes its CSV, and returns the process exit code.
pub fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let table = run(cfg)?;
    let text = render(cfg, &table)?;
    match output_path(cfg) {
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(CliError::Io(e.to_string())),
                _ => {}
            }
        }
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
    }
    if table.violations > 0 {
        eprintln!("{} property violations", table.violations);
    }
    if table.failures > 0 {
        eprintln!("{} rows failed numerically", table.failures);
    }
    Ok(exit_code(&table))
}

/// Violations take precedence over numerical failures.
pub fn exit_code(table: &Table) -> i32 {
    if table.violations > 0 {
        exit::VIOLATION
    } else if table.failures > 0 {
        exit::NUMERIC
    } else {
        exit::OK
    }
}
