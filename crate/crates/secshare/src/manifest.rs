//! Run manifests: enough to repeat a run and get the same output files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::Command;
use crate::error::{CliError, CliResult};
use crate::formats::Format;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub subcommand: String,
    /// Every parameter of the command, defaults included.
    pub params: Command,
    pub format: Format,
    pub seed: Option<u64>,
    /// Version of the tool that wrote the manifest.
    pub version: String,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(params: Command, format: Format, outputs: Vec<String>, wall_time_s: f64) -> Self {
        RunManifest {
            schema: SCHEMA_VERSION,
            subcommand: params.name().to_string(),
            seed: params.seed(),
            params,
            format,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            wall_time_s,
        }
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("malformed manifest {}: {e}", path.display())))?;
        if m.schema != SCHEMA_VERSION {
            return Err(CliError::validation(format!("unsupported manifest schema {}", m.schema)));
        }
        if matches!(m.params, Command::Replay(_)) {
            return Err(CliError::validation("a manifest cannot record a replay"));
        }
        Ok(m)
    }
}
