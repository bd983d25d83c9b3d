//! Benchmark harness around `heston-core`: configuration, execution and output.

pub mod config;
pub mod output;

use std::io::Write;

use heston_core::{greeks, price, HestonError};
use thiserror::Error;

use config::{CommandKind, Format, RunManifest};
use output::{ManifestRecord, ResultRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("validation error: {0}")]
    Validation(HestonError),
    #[error("numerical failure ({}): {0}", .0.name())]
    Numerical(HestonError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage and validation problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 2,
            _ => 1,
        }
    }
}

impl From<HestonError> for CliError {
    fn from(e: HestonError) -> Self {
        match e {
            HestonError::InvalidParams { .. }
            | HestonError::ConfigInvalid(_)
            | HestonError::UnsupportedProduct(_) => CliError::Validation(e),
            _ => CliError::Numerical(e),
        }
    }
}

/// Runs the manifest's command and writes rows to `out`. For table and CSV
/// output the manifest goes to `log` as one JSON line; JSON-lines rows carry
/// it inline.
pub fn execute(
    manifest: &RunManifest,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<(), CliError> {
    if manifest.format != Format::JsonLines {
        let record = ManifestRecord::new(manifest, &manifest.config);
        writeln!(log, "manifest {}", serde_json::to_string(&record)?)?;
    }
    let rows = run(manifest)?;
    match manifest.format {
        Format::Table => output::write_table(out, &rows)?,
        Format::Csv => output::write_csv(out, &rows)?,
        Format::JsonLines => output::write_jsonl(out, manifest, &rows)?,
    }
    if let Some(path) = &manifest.emit_points {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        output::write_points(&mut file, manifest.config.seed, manifest.config.n_paths)?;
        file.flush()?;
    }
    Ok(())
}

/// Computes the result rows. `greeks` yields price, delta and rho rows in
/// that order.
pub fn run(manifest: &RunManifest) -> Result<Vec<ResultRow>, CliError> {
    let (params, spec) = (&manifest.params, &manifest.spec);
    let mut rows = Vec::new();
    match manifest.command {
        CommandKind::Price | CommandKind::Bench => {
            for config in manifest.configs() {
                let summary = price(params, spec, &config)?;
                rows.push(ResultRow {
                    config,
                    quantity: "price",
                    summary,
                });
            }
        }
        CommandKind::Greeks => {
            for config in manifest.configs() {
                let g = greeks(params, spec, &config)?;
                for (quantity, summary) in [("price", g.price), ("delta", g.delta), ("rho", g.rho)]
                {
                    rows.push(ResultRow {
                        config: config.clone(),
                        quantity,
                        summary,
                    });
                }
            }
        }
    }
    Ok(rows)
}
