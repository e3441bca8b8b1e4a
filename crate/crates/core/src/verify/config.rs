use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::scheme::Scheme;
use crate::simulate::{ResidualMode, SimOptions};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn one() -> f64 {
    1.0
}
fn default_rel_tol() -> f64 {
    SimOptions::default().rel_tol
}
fn default_max_points() -> u64 {
    SimOptions::default().max_points
}

/// One Monte Carlo experiment: a model, a scheme and an `r` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub model: ModelSpec,
    pub scheme: Scheme,
    /// Strictly increasing trimming levels, each at least 2.
    pub r_grid: Vec<u64>,
    #[serde(default = "one")]
    pub t: f64,
    /// Replicates per `r`.
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub mode: ResidualMode,
    #[serde(default = "default_max_points")]
    pub max_points: u64,
    #[serde(default)]
    pub ks: KsSpec,
    #[serde(default)]
    pub checks: MomentChecks,
    #[serde(default)]
    pub trend: TrendSpec,
    /// Keep the normalized samples in memory for plot data.
    #[serde(default)]
    pub keep_plot_data: bool,
}

/// KS threshold at `r_i`: `null_quantile/√n + slack_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsSpec {
    #[serde(default = "KsSpec::default_quantile")]
    pub null_quantile: f64,
    #[serde(default)]
    pub slack: Slack,
    /// Columns whose KS distance enters the pass flags.
    #[serde(default = "KsSpec::default_columns")]
    pub columns: Vec<usize>,
}

impl KsSpec {
    fn default_quantile() -> f64 {
        1.36
    }
    fn default_columns() -> Vec<usize> {
        vec![1, 2]
    }
}

impl Default for KsSpec {
    fn default() -> Self {
        Self {
            null_quantile: Self::default_quantile(),
            slack: Slack::default(),
            columns: Self::default_columns(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Slack {
    Uniform(f64),
    PerR(Vec<f64>),
}

impl Default for Slack {
    fn default() -> Self {
        Slack::Uniform(0.0)
    }
}

impl Slack {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Slack::Uniform(s) => *s,
            Slack::PerR(v) => v[i],
        }
    }
}

/// Acceptance band for a sample statistic relative to the limit law's value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Band {
    /// `min ≤ value ≤ max`.
    Range { min: f64, max: f64 },
    /// `|value − target| ≤ rel·|target|`.
    Rel { rel: f64 },
    /// `|value − target| ≤ abs`.
    Abs { abs: f64 },
    /// `|value − target| ≤ se·(standard error)`.
    Se { se: f64 },
}

impl Band {
    pub fn contains(&self, value: f64, target: f64, std_error: f64) -> bool {
        let dev = (value - target).abs();
        match *self {
            Band::Range { min, max } => value >= min && value <= max,
            Band::Rel { rel } => dev <= rel * target.abs(),
            Band::Abs { abs } => dev <= abs,
            Band::Se { se } => dev <= se * std_error,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            Band::Range { min, max } => min <= max,
            Band::Rel { rel: v } | Band::Abs { abs: v } | Band::Se { se: v } => v > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid band {self:?}")))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentChecks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_col1: Option<Band>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_col2: Option<Band>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr: Option<Band>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendRule {
    /// Recorded in the report, not part of the verdict.
    #[default]
    Record,
    NonIncreasing,
    StrictlyDecreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendSpec {
    #[serde(default)]
    pub rule: TrendRule,
    /// KS column the trend is read from.
    #[serde(default = "TrendSpec::default_column")]
    pub column: usize,
}

impl TrendSpec {
    fn default_column() -> usize {
        2
    }
}

impl Default for TrendSpec {
    fn default() -> Self {
        Self {
            rule: TrendRule::Record,
            column: Self::default_column(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            rel_tol: self.rel_tol,
            mode: self.mode,
            max_points: self.max_points,
        }
    }

    pub fn ks_threshold(&self, index: usize) -> f64 {
        self.ks.null_quantile / (self.n as f64).sqrt() + self.ks.slack.at(index)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.r_grid.is_empty() {
            return bad("r_grid is empty".into());
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("r_grid must be strictly increasing".into());
        }
        if self.r_grid[0] < 2 {
            return bad("every r must be at least 2".into());
        }
        if self.n < 100 {
            return bad(format!("n = {} is below the minimum of 100", self.n));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return bad(format!("t = {} must be positive", self.t));
        }
        self.sim_options().check()?;
        if !(self.ks.null_quantile > 0.0) {
            return bad("ks.null_quantile must be positive".into());
        }
        match &self.ks.slack {
            Slack::PerR(v) if v.len() != self.r_grid.len() => {
                return bad(format!("ks.slack has {} entries for {} r values", v.len(), self.r_grid.len()))
            }
            Slack::PerR(v) if v.iter().any(|s| !(*s >= 0.0)) => return bad("ks.slack must be non-negative".into()),
            Slack::Uniform(s) if !(*s >= 0.0) => return bad("ks.slack must be non-negative".into()),
            _ => {}
        }
        if self.ks.columns.iter().any(|c| !(1..=2).contains(c)) {
            return bad("ks.columns entries must be 1 or 2".into());
        }
        if !(1..=2).contains(&self.trend.column) {
            return bad("trend.column must be 1 or 2".into());
        }
        for b in [self.checks.var_col1, self.checks.var_col2, self.checks.corr].into_iter().flatten() {
            b.check()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"model": "stable", "alpha": 0.5},
        "scheme": "DELTA_ONLY",
        "r_grid": [100, 200],
        "n": 1000,
        "seed": 1
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.t, 1.0);
        assert_eq!(c.rel_tol, 1e-4);
        assert_eq!(c.mode, ResidualMode::GaussianResidual);
        assert_eq!(c.ks.columns, vec![1, 2]);
        assert_eq!(c.trend.rule, TrendRule::Record);
        assert!((c.ks_threshold(0) - 1.36 / 1000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bands_parse_in_every_form() {
        let b: Band = serde_json::from_str(r#"{"min": 3.6, "max": 4.4}"#).unwrap();
        assert!(b.contains(4.0, 0.0, 0.0));
        let b: Band = serde_json::from_str(r#"{"rel": 0.1}"#).unwrap();
        assert!(b.contains(1.05, 1.0, 0.0) && !b.contains(1.2, 1.0, 0.0));
        let b: Band = serde_json::from_str(r#"{"abs": 0.05}"#).unwrap();
        assert!(b.contains(-0.04, 0.0, 0.0) && !b.contains(0.06, 0.0, 0.0));
        let b: Band = serde_json::from_str(r#"{"se": 3}"#).unwrap();
        assert!(b.contains(0.29, 0.0, 0.1) && !b.contains(0.31, 0.0, 0.1));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.r_grid = vec![200, 100];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.n = 99;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.ks.slack = Slack::PerR(vec![0.1]);
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"seed\": 1", "\"seed\": 1, \"bogus\": 2")).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
