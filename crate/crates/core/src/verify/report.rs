use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, TrendRule};
use super::plot::cdf_overlay;
use crate::error::{Error, Result};
use crate::limit_laws::LimitLaw;
use crate::stats::sorted;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Simulator,
    /// Pairs drawn from the limit law itself (null calibration).
    LimitLaw,
}

/// Statistics of one `r` cell. `pass_*` is `None` for unconfigured checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub r: u64,
    pub n: usize,
    pub ks_col1: f64,
    pub ks_col2: f64,
    pub ks_threshold: f64,
    pub sample_mean_col1: f64,
    pub sample_mean_col2: f64,
    pub sample_var_col1: f64,
    pub sample_var_col2: f64,
    pub sample_corr: f64,
    pub law_var_col1: f64,
    pub law_var_col2: f64,
    pub law_corr: f64,
    pub pass_ks_col1: Option<bool>,
    pub pass_ks_col2: Option<bool>,
    pub pass_var_col1: Option<bool>,
    pub pass_var_col2: Option<bool>,
    pub pass_corr: Option<bool>,
    pub passed: bool,
    /// Largest `L` over the replicates (simulator only).
    pub max_truncation_index: Option<u64>,
    pub max_achieved_rel_tol: Option<f64>,
}

impl CellRecord {
    pub fn ks(&self, column: usize) -> f64 {
        if column == 1 {
            self.ks_col1
        } else {
            self.ks_col2
        }
    }

    pub fn ks_passes(&self) -> bool {
        self.pass_ks_col1 != Some(false) && self.pass_ks_col2 != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRecord {
    pub rule: TrendRule,
    pub column: usize,
    pub values: Vec<f64>,
    /// Whether the configured rule holds; for `record`, whether the values are non-increasing.
    pub holds: bool,
    pub enforced: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub model: String,
    pub law: LimitLaw,
    pub source: SampleSource,
    pub records: Vec<CellRecord>,
    pub trend: TrendRecord,
    /// Conjunction of the terminal cell's flags, the enforced trend and completion.
    pub verdict: bool,
    /// Set when a cell could not be simulated; later cells are missing.
    pub aborted: Option<String>,
    /// Wall-clock seconds; not serialized so identical runs give identical files.
    #[serde(skip)]
    pub runtime_secs: f64,
    /// Normalized pairs per cell, kept when `keep_plot_data` is set.
    #[serde(skip)]
    pub samples: Vec<Vec<[f64; 2]>>,
}

impl PartialEq for ExperimentReport {
    fn eq(&self, o: &Self) -> bool {
        self.schema_version == o.schema_version
            && self.config == o.config
            && self.model == o.model
            && self.law == o.law
            && self.source == o.source
            && self.records == o.records
            && self.trend == o.trend
            && self.verdict == o.verdict
            && self.aborted == o.aborted
    }
}

impl ExperimentReport {
    pub fn terminal(&self) -> Option<&CellRecord> {
        self.records.last()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "plotdata" => Ok(ReportFormat::PlotData),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Serialize)]
struct PlotRow {
    r: u64,
    column: usize,
    x: f64,
    empirical_cdf: f64,
    limit_cdf: f64,
}

/// Serialize a report. `PlotData` needs the samples kept by `keep_plot_data`.
pub fn emit_report<W: Write>(report: &ExperimentReport, format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for rec in &report.records {
                w.serialize(rec)?;
            }
            w.flush()?;
        }
        ReportFormat::PlotData => {
            if report.samples.len() != report.records.len() {
                return Err(Error::Config("plot data needs the samples; set keep_plot_data".into()));
            }
            let mut w = csv::Writer::from_writer(out);
            for (rec, rows) in report.records.iter().zip(&report.samples) {
                for c in 1..=2 {
                    let col = sorted(rows.iter().map(|p| p[c - 1]));
                    for (x, emp, lim) in cdf_overlay(&col, |x| report.law.marginal_cdf(c, x))? {
                        w.serialize(PlotRow {
                            r: rec.r,
                            column: c,
                            x,
                            empirical_cdf: emp,
                            limit_cdf: lim,
                        })?;
                    }
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
