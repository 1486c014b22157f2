//! Configuration, orchestration and result files for the `subpressure`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod output;
pub mod suite;

use std::path::{Path, PathBuf};

pub use commands::{Command, CommandOutput};
pub use config::{ConfigError, Experiment, ExperimentConfig, Format};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const FAILURE: i32 = 4;
}

/// Exit code for a library error.
pub fn exit_code(e: &subpressure::Error) -> i32 {
    match e {
        subpressure::Error::Resource(_) => exit::RESOURCE,
        subpressure::Error::Domain(_) | subpressure::Error::Invalid { .. } => exit::SCHEMA,
        subpressure::Error::Degenerate(_) | subpressure::Error::NotConverged(_) => exit::FAILURE,
    }
}

/// Runs `cmd` and writes its files into `out`. Returns the written paths and
/// the command output.
pub fn execute(
    cmd: Command,
    cfg: &ExperimentConfig,
    config_bytes: &[u8],
    out: &Path,
    format: Format,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<(Vec<PathBuf>, CommandOutput), (i32, String)> {
    let exp = cfg.build().map_err(|e| (exit::SCHEMA, e.to_string()))?;
    let res = commands::run(cmd, cfg, &exp, seed, tolerance).map_err(|e| (exit_code(&e), e.to_string()))?;
    let header = output::Header::new(cmd.name(), config_bytes, seed);
    let mut paths = Vec::new();
    let io = |e: std::io::Error| (exit::FAILURE, format!("cannot write results: {e}"));
    if format.json() {
        paths.push(output::write_json(out, cmd.name(), &header, &res.result).map_err(io)?);
    }
    if format.csv() {
        for (suffix, table) in &res.tables {
            let stem = if suffix.is_empty() {
                cmd.name().to_string()
            } else {
                format!("{}_{suffix}", cmd.name())
            };
            paths.push(output::write_csv(out, &stem, &header, table).map_err(io)?);
        }
    }
    Ok((paths, res))
}
