//! Runs a parsed command line: compute, then write every output and the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cli::{Cli, Command};
use crate::commands::{self, Report};
use crate::drivers::with_pool;
use crate::error::{CliError, CliResult};
use crate::formats::{to_json_string, Format};
use crate::manifest::{RunManifest, MANIFEST_FILE};

/// Result of a successful run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: Vec<String>,
    pub out: PathBuf,
}

pub fn execute(cli: Cli) -> CliResult<Outcome> {
    let (command, format) = match cli.command {
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest)?;
            (m.params, m.format)
        }
        other => (other, cli.format),
    };
    run_command(command, format, &cli.out)
}

/// Runs one command and writes its outputs under `out`.
pub fn run_command(command: Command, format: Format, out: &Path) -> CliResult<Outcome> {
    let command = commands::resolve(command)?;
    let start = Instant::now();
    let report = with_pool(|| commands::run(&command))??;
    let outputs = write_report(&report, format, out)?;
    let manifest = RunManifest::new(command, format, outputs, start.elapsed().as_secs_f64());
    write_file(&out.join(MANIFEST_FILE), &to_json_string(&serde_json::to_value(&manifest).expect("plain data")))?;
    Ok(Outcome { manifest, summary: report.summary, out: out.to_path_buf() })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

fn write_report(r: &Report, format: Format, out: &Path) -> CliResult<Vec<String>> {
    fs::create_dir_all(out).map_err(|source| CliError::Output { path: out.to_path_buf(), source })?;
    let mut files: Vec<(String, String)> = Vec::new();
    for t in &r.tables {
        files.push((format!("{}.{}", t.name, format.extension()), t.render(format)));
    }
    for (name, doc) in &r.documents {
        files.push((format!("{name}.json"), to_json_string(doc)));
    }
    files.extend(r.extras.iter().cloned());
    let mut names = Vec::new();
    for (name, contents) in files {
        if name == MANIFEST_FILE || names.contains(&name) {
            return Err(CliError::Solver(format!("output name {name} used twice")));
        }
        write_file(&out.join(&name), &contents)?;
        names.push(name);
    }
    Ok(names)
}
