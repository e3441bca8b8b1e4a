//! Monte Carlo verification: `r` sweeps, KS distances and moment checks
//! against the limit laws.

mod config;
mod ks;
mod plot;
mod report;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{Band, ExperimentConfig, KsSpec, MomentChecks, Slack, TrendRule, TrendSpec, SCHEMA_VERSION};
pub use ks::ks_statistic;
pub use plot::{cdf_overlay, marginal_quantile, qq_points};
pub use report::{emit_report, CellRecord, ExperimentReport, ReportFormat, SampleSource, TrendRecord};

use crate::error::{Error, Result};
use crate::limit_laws::{make_limit_law, LimitLaw};
use crate::model::{validate_model, LevyTail, Model};
use crate::rng::RngStream;
use crate::simulate::{sample_trimmed_batch, Normalizer, TrimmedSample};
use crate::stats::{correlation, sorted, ColumnSummary};

/// Build and validate the configured model.
pub fn build_model(config: &ExperimentConfig, base_dir: Option<&Path>) -> Result<Model> {
    let m = config.model.build(base_dir)?;
    validate_model(&m).into_result()?;
    Ok(m)
}

/// The limit law the configured scheme is compared with.
pub fn law_for(config: &ExperimentConfig, model: &Model) -> Result<LimitLaw> {
    make_limit_law(config.scheme, model.gamma(), model.declared_c_alpha(), config.t)
}

/// All replicates of one cell.
pub fn simulate_cell(config: &ExperimentConfig, model: &Model, r: u64) -> Result<Vec<TrimmedSample>> {
    sample_trimmed_batch(model, r, config.t, config.n, config.seed, &config.sim_options())
}

/// KS distances, moments and pass flags of one cell.
pub fn evaluate_cell(
    config: &ExperimentConfig,
    law: &LimitLaw,
    index: usize,
    rows: &[[f64; 2]],
    truncation: Option<(u64, f64)>,
) -> Result<CellRecord> {
    let c1 = sorted(rows.iter().map(|p| p[0]));
    let c2 = sorted(rows.iter().map(|p| p[1]));
    let cdf = |c: usize| move |x: f64| law.marginal_cdf(c, x).unwrap_or(f64::NAN);
    let (ks1, ks2) = rayon::join(|| ks_statistic(&c1, cdf(1)), || ks_statistic(&c2, cdf(2)));
    let (ks1, ks2) = (ks1?, ks2?);
    if ks1.is_nan() || ks2.is_nan() {
        return Err(Error::Config("limit CDF could not be evaluated".into()));
    }
    let s1 = ColumnSummary::of(rows.iter().map(|p| p[0]));
    let s2 = ColumnSummary::of(rows.iter().map(|p| p[1]));
    let corr = correlation(rows);
    let lm = law.moments();
    let thr = config.ks_threshold(index);
    let col_flag = |c: usize, ks: f64| config.ks.columns.contains(&c).then_some(ks <= thr);
    let n = rows.len() as f64;
    let corr_se = (1.0 - corr * corr).max(0.0) / (n - 1.0).sqrt();
    let pass_var_col1 = config.checks.var_col1.map(|b| b.contains(s1.var, lm.var[0], s1.var_std_error()));
    let pass_var_col2 = config.checks.var_col2.map(|b| b.contains(s2.var, lm.var[1], s2.var_std_error()));
    let pass_corr = config.checks.corr.map(|b| b.contains(corr, lm.corr, corr_se));
    let pass_ks_col1 = col_flag(1, ks1);
    let pass_ks_col2 = col_flag(2, ks2);
    let passed = [pass_ks_col1, pass_ks_col2, pass_var_col1, pass_var_col2, pass_corr]
        .iter()
        .all(|f| *f != Some(false));
    Ok(CellRecord {
        r: config.r_grid[index],
        n: rows.len(),
        ks_col1: ks1,
        ks_col2: ks2,
        ks_threshold: thr,
        sample_mean_col1: s1.mean,
        sample_mean_col2: s2.mean,
        sample_var_col1: s1.var,
        sample_var_col2: s2.var,
        sample_corr: corr,
        law_var_col1: lm.var[0],
        law_var_col2: lm.var[1],
        law_corr: lm.corr,
        pass_ks_col1,
        pass_ks_col2,
        pass_var_col1,
        pass_var_col2,
        pass_corr,
        passed,
        max_truncation_index: truncation.map(|t| t.0),
        max_achieved_rel_tol: truncation.map(|t| t.1),
    })
}

/// Trend, verdict and bookkeeping around finished cells.
pub fn assemble_report(
    config: &ExperimentConfig,
    model_label: String,
    law: LimitLaw,
    source: SampleSource,
    records: Vec<CellRecord>,
    aborted: Option<String>,
    samples: Vec<Vec<[f64; 2]>>,
) -> ExperimentReport {
    let column = config.trend.column;
    let values: Vec<f64> = records.iter().map(|r| r.ks(column)).collect();
    let holds = match config.trend.rule {
        TrendRule::StrictlyDecreasing => values.windows(2).all(|w| w[1] < w[0]),
        TrendRule::NonIncreasing | TrendRule::Record => values.windows(2).all(|w| w[1] <= w[0]),
    };
    let enforced = config.trend.rule != TrendRule::Record;
    let complete = aborted.is_none() && records.len() == config.r_grid.len();
    let verdict = complete && records.last().is_some_and(|r| r.passed) && (!enforced || holds);
    ExperimentReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        model: model_label,
        law,
        source,
        records,
        trend: TrendRecord {
            rule: config.trend.rule,
            column,
            values,
            holds,
            enforced,
        },
        verdict,
        aborted,
        runtime_secs: 0.0,
        samples: if config.keep_plot_data { samples } else { Vec::new() },
    }
}

/// Report from already simulated cells, one slice per `r` in grid order.
pub fn report_from_trimmed(
    config: &ExperimentConfig,
    model: &Model,
    cells: &[&[TrimmedSample]],
) -> Result<ExperimentReport> {
    let law = law_for(config, model)?;
    let mut records = Vec::with_capacity(cells.len());
    let mut kept = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let r = config.r_grid[i];
        let norm = Normalizer::new(model, config.scheme, r, config.t)?;
        let rows = norm.apply_all(model, cell)?;
        let max_l = cell.iter().map(|s| s.truncation_index).max().unwrap_or(0);
        let max_tol = cell.iter().map(|s| s.achieved_rel_tol()).fold(0.0, f64::max);
        records.push(evaluate_cell(config, &law, i, &rows, Some((max_l, max_tol)))?);
        if config.keep_plot_data {
            kept.push(rows);
        }
    }
    Ok(assemble_report(config, model.label(), law, SampleSource::Simulator, records, None, kept))
}

/// Run a configured experiment against the simulator.
pub fn run_experiment(config: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ExperimentReport> {
    config.validate()?;
    let model = build_model(config, base_dir)?;
    run_with_model(config, &model)
}

/// [`run_experiment`] with a prebuilt model.
pub fn run_with_model(config: &ExperimentConfig, model: &Model) -> Result<ExperimentReport> {
    let start = Instant::now();
    let law = law_for(config, model)?;
    let mut records = Vec::new();
    let mut kept = Vec::new();
    let mut aborted = None;
    for (i, &r) in config.r_grid.iter().enumerate() {
        let norm = Normalizer::new(model, config.scheme, r, config.t)?;
        let cell = match simulate_cell(config, model, r) {
            Ok(c) => c,
            Err(e @ Error::Budget { .. }) => {
                aborted = Some(format!("r = {r}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let rows = norm.apply_all(model, &cell)?;
        let max_l = cell.iter().map(|s| s.truncation_index).max().unwrap_or(0);
        let max_tol = cell.iter().map(|s| s.achieved_rel_tol()).fold(0.0, f64::max);
        records.push(evaluate_cell(config, &law, i, &rows, Some((max_l, max_tol)))?);
        if config.keep_plot_data {
            kept.push(rows);
        }
    }
    let mut rep = assemble_report(config, model.label(), law, SampleSource::Simulator, records, aborted, kept);
    rep.runtime_secs = start.elapsed().as_secs_f64();
    Ok(rep)
}

/// Pairs drawn directly from `law`; replicate `i` uses stream `(seed, i)`.
pub fn limit_law_pairs(law: &LimitLaw, n: usize, seed: u64) -> Vec<[f64; 2]> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| law.sample_pair(&mut RngStream::new(seed, i).rng()))
        .collect()
}

/// Run the harness on samples from the limit law instead of the simulator.
pub fn run_null_experiment(config: &ExperimentConfig, law: &LimitLaw, seed: u64) -> Result<ExperimentReport> {
    let start = Instant::now();
    let rows = limit_law_pairs(law, config.n, seed);
    let mut records = Vec::new();
    for i in 0..config.r_grid.len() {
        records.push(evaluate_cell(config, law, i, &rows, None)?);
    }
    let kept = if config.keep_plot_data {
        vec![rows; config.r_grid.len()]
    } else {
        Vec::new()
    };
    let mut rep = assemble_report(config, "limit law".into(), *law, SampleSource::LimitLaw, records, None, kept);
    rep.runtime_secs = start.elapsed().as_secs_f64();
    Ok(rep)
}
