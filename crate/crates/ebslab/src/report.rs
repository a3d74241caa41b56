//! Output formats: key-value reports, CSV tables and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use ebslab_core::simulation::ExperimentResult;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::vector_io::fmt_f64;

/// `key = value` lines in insertion order.
#[derive(Debug, Default, Clone)]
pub struct KeyValueReport {
    entries: Vec<(String, String)>,
}

impl KeyValueReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, fmt_f64(value))
    }

    pub fn opt_count(&mut self, key: &str, value: Option<usize>) -> &mut Self {
        match value {
            Some(v) => self.text(key, v),
            None => self.text(key, "none"),
        }
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `<out>` with `suffix` in place of its extension: `runs.csv` becomes
/// `runs.summary.csv` for suffix `summary.csv`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data { path: path.to_path_buf(), message: format!("{other:?}") },
    }
}

pub const RECORD_HEADER: [&str; 9] = [
    "replicate",
    "covered",
    "radius",
    "alpha_hat",
    "risk_q",
    "point_risk_median",
    "point_risk_mean",
    "multiplier",
    "distance",
];

/// One row per replicate and multiplier, replicates in index order.
pub fn write_records_csv(path: &Path, result: &ExperimentResult) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RECORD_HEADER).map_err(|e| csv_error(path, e))?;
    for rec in &result.records {
        for (summary, &covered) in result.summaries.iter().zip(&rec.covered) {
            w.write_record([
                rec.replicate.to_string(),
                u8::from(covered).to_string(),
                fmt_f64(rec.radius),
                fmt_f64(rec.alpha_hat),
                fmt_f64(rec.risk_q),
                fmt_f64(rec.point_risk_median),
                fmt_f64(rec.point_risk_mean),
                fmt_f64(summary.multiplier),
                fmt_f64(rec.distance),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "multiplier",
    "covered",
    "trials",
    "coverage_rate",
    "wilson_low",
    "wilson_high",
    "mean_radius",
    "mean_diameter_bound",
    "mean_posterior_risk_q",
    "mean_point_risk_median",
    "mean_point_risk_mean",
    "mean_alpha_hat",
    "failures",
    "below_sparsity_floor",
];

/// One row per multiplier.
pub fn write_summary_csv(path: &Path, result: &ExperimentResult) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_error(path, e))?;
    for s in &result.summaries {
        w.write_record([
            fmt_f64(s.multiplier),
            s.covered.to_string(),
            s.trials.to_string(),
            fmt_f64(s.coverage_rate),
            fmt_f64(s.wilson.0),
            fmt_f64(s.wilson.1),
            fmt_f64(result.mean_radius),
            fmt_f64(s.mean_diameter_bound),
            fmt_f64(result.mean_posterior_risk_q),
            fmt_f64(result.mean_point_risk_median),
            fmt_f64(result.mean_point_risk_mean),
            fmt_f64(result.mean_alpha_hat),
            result.failures.to_string(),
            result.below_sparsity_floor.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Provenance written next to every output set. Only the manifest carries
/// timestamps, so the data files stay byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub workers: usize,
    pub started_at: String,
    pub finished_at: String,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64, workers: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            seed,
            workers,
            started_at: now_rfc3339(),
            finished_at: String::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = now_rfc3339();
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        writeln!(f, "{text}").map_err(|e| CliError::io(path, e))
    }
}

fn now_rfc3339() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default()
}
