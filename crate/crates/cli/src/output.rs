//! Report destinations and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::{Cli, CliError, Outcome, OUT_DIR_ENV, TOOL, VERSION};

/// First line of every report.
#[derive(Serialize)]
struct Header<'a> {
    tool: &'a str,
    version: &'a str,
    config: &'a Cli,
}

/// Header plus one line per record, newline-terminated.
pub fn render(cli: &Cli, outcome: &Outcome) -> Result<String, CliError> {
    let header = Header {
        tool: TOOL,
        version: VERSION,
        config: cli,
    };
    let mut text = serde_json::to_string(&header)
        .map_err(|e| CliError::validation("serialization", e.to_string()))?;
    text.push('\n');
    for r in &outcome.records {
        text.push_str(&r.to_line());
        text.push('\n');
    }
    Ok(text)
}

/// `--out`, else `$ORLICZ_OUT_DIR/<subcommand>.jsonl`, else standard output.
pub fn report_path(cli: &Cli) -> Option<PathBuf> {
    cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.jsonl", cli.command.name())))
    })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::validation("io", format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_reports(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    if cli.csv.is_some() && outcome.csv.is_none() {
        return Err(CliError::validation(
            "usage",
            format!("`{}` has no CSV output", cli.command.name()),
        ));
    }
    let text = render(cli, outcome)?;
    match report_path(cli) {
        Some(path) => write_atomic(&path, text.as_bytes())?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::validation("io", e.to_string()))?;
        }
    }
    if let (Some(path), Some(csv)) = (&cli.csv, &outcome.csv) {
        write_atomic(path, csv.as_bytes())?;
    }
    Ok(())
}
