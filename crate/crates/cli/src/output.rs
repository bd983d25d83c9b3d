//! Result rows in table, CSV and JSON-lines form.

use std::io::Write;

use heston_core::random::{sobol_point, PseudoStream, UniformSource};
use heston_core::{McSummary, SimConfig, Style};
use serde::{Deserialize, Serialize};

use crate::config::RunManifest;
use crate::CliError;

/// CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scheme: String,
    pub sampler: String,
    pub paths: usize,
    pub steps: usize,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub wall_ms_mean: f64,
}

/// Manifest fields, flattened into every JSON-lines row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    pub format: String,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub r: f64,
    pub v0: f64,
    pub s0: f64,
    pub strike: f64,
    pub maturity: f64,
    pub product: String,
    pub right: String,
    pub averaging_times: Vec<f64>,
    pub scheme: String,
    pub sampler: String,
    pub sobol_highdim_ack: bool,
    pub paths: usize,
    pub steps: usize,
    pub runs: usize,
    pub seed: u64,
    pub parallelism: String,
}

impl ManifestRecord {
    pub fn new(m: &RunManifest, cfg: &SimConfig) -> Self {
        Self {
            command: m.command.as_str().into(),
            version: m.version.clone(),
            timestamp: m.timestamp.clone(),
            format: m.format.as_str().into(),
            kappa: m.params.kappa,
            theta: m.params.theta,
            sigma: m.params.sigma,
            rho: m.params.rho,
            r: m.params.r,
            v0: m.params.v0,
            s0: m.spec.spot,
            strike: m.spec.strike,
            maturity: m.spec.maturity,
            product: m.spec.style.as_str().into(),
            right: m.spec.right.as_str().into(),
            averaging_times: match m.spec.style {
                Style::European => Vec::new(),
                Style::AsianArithmetic => m.spec.averaging_times.clone(),
            },
            scheme: cfg.scheme.as_str().into(),
            sampler: cfg.sampler.as_str().into(),
            sobol_highdim_ack: cfg.sobol_highdim_ack,
            paths: cfg.n_paths,
            steps: cfg.n_steps,
            runs: cfg.n_runs,
            seed: cfg.seed,
            parallelism: cfg.parallelism.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonRow {
    #[serde(flatten)]
    pub manifest: ManifestRecord,
    /// price, delta or rho
    pub quantity: String,
    pub mean: f64,
    pub std: f64,
    pub wall_ms_mean: f64,
    pub per_run: Vec<f64>,
}

/// One estimate ready for output.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub config: SimConfig,
    pub quantity: &'static str,
    pub summary: McSummary,
}

impl ResultRow {
    pub fn csv(&self) -> CsvRow {
        CsvRow {
            scheme: self.config.scheme.as_str().into(),
            sampler: self.config.sampler.as_str().into(),
            paths: self.config.n_paths,
            steps: self.config.n_steps,
            runs: self.config.n_runs,
            mean: self.summary.estimate,
            std: self.summary.std_error,
            wall_ms_mean: self.summary.wall_ms,
        }
    }
}

pub fn write_csv(out: &mut dyn Write, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row.csv())?;
    }
    if rows.is_empty() {
        w.write_record([
            "scheme",
            "sampler",
            "paths",
            "steps",
            "runs",
            "mean",
            "std",
            "wall_ms_mean",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl(
    out: &mut dyn Write,
    manifest: &RunManifest,
    rows: &[ResultRow],
) -> Result<(), CliError> {
    for row in rows {
        let rec = JsonRow {
            manifest: ManifestRecord::new(manifest, &row.config),
            quantity: row.quantity.into(),
            mean: row.summary.estimate,
            std: row.summary.std_error,
            wall_ms_mean: row.summary.wall_ms,
            per_run: row.summary.per_run_values.clone(),
        };
        serde_json::to_writer(&mut *out, &rec)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Aligned text table. The last column is wall-clock time relative to the
/// first row of the same quantity (scheme and size comparison, same host).
pub fn write_table(out: &mut dyn Write, rows: &[ResultRow]) -> Result<(), CliError> {
    writeln!(
        out,
        "{:<9} {:<7} {:>8} {:>6} {:>5}  {:<8} {:>24} {:>12} {:>8}",
        "scheme",
        "sampler",
        "paths",
        "steps",
        "runs",
        "quantity",
        "mean (std)",
        "wall_ms",
        "wall_x"
    )?;
    for row in rows {
        let first = rows.iter().find(|r| r.quantity == row.quantity).unwrap();
        let ratio = row.summary.wall_ms / first.summary.wall_ms;
        writeln!(
            out,
            "{:<9} {:<7} {:>8} {:>6} {:>5}  {:<8} {:>24} {:>12.2} {:>8.2}",
            row.config.scheme.as_str(),
            row.config.sampler.as_str(),
            row.config.n_paths,
            row.config.n_steps,
            row.config.n_runs,
            row.quantity,
            format!("{:.5} ({:.5})", row.summary.estimate, row.summary.std_error),
            row.summary.wall_ms,
            ratio
        )?;
    }
    Ok(())
}

/// Dumps `n` two-dimensional pseudo-random and Sobol points.
pub fn write_points(out: &mut dyn Write, seed: u64, n: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sampler", "index", "x", "y"])?;
    let mut s = PseudoStream::new(seed, 0);
    for i in 0..n {
        let (x, y) = (s.next_uniform(), s.next_uniform());
        w.serialize(("pseudo", i, x, y))?;
    }
    for i in 0..n {
        let p = sobol_point(2, i as u64 + 1).map_err(crate::CliError::Validation)?;
        w.serialize(("sobol", i, p[0], p[1]))?;
    }
    w.flush()?;
    Ok(())
}
