use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use tlp_core::moments::c_alpha_limit;
use tlp_core::simulate::sample_trimmed_batch;
use tlp_core::verify::{cdf_overlay, marginal_quantile, qq_points};
use tlp_core::{
    c_alpha_ratio, emit_report, limit_sample, make_limit_law, norming_sequences, repro, run_experiment,
    truncated_moment, validate_model, ExperimentConfig, ExperimentReport, LevyTail, LimitLaw, Model, ModelSpec,
    Normalizer, ReportFormat, RngStream, SimOptions,
};

use crate::output::{echo_config, write_artifact};
use crate::{
    Command, FormatArg, LawArgs, LimitCmd, ModelArgs, ModelCmd, ModelKind, MomentsCmd, NormingCmd, PlotCmd, ReproCmd,
    ReportArgs, SimulateCmd, VerifyCmd,
};

/// Run a subcommand. `Ok(false)` means the run completed but its verdict failed.
pub fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Model(c) => model(c),
        Command::Norming(c) => norming(c).map(|_| true),
        Command::Moments(c) => moments(c).map(|_| true),
        Command::Simulate(c) => simulate(c).map(|_| true),
        Command::Limit(c) => limit(c).map(|_| true),
        Command::Verify(c) => verify(c),
        Command::Repro(c) => repro_cmd(c),
        Command::Plot(c) => plot(c).map(|_| true),
    }
}

fn model_spec(a: &ModelArgs) -> Result<ModelSpec> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("--model {:?} needs {flag}", a.model));
    Ok(match a.model {
        ModelKind::Stable => ModelSpec::Stable {
            alpha: need(a.alpha, "--alpha")?,
        },
        ModelKind::Logpower => ModelSpec::LogPower {
            gamma: need(a.gamma, "--gamma")?,
        },
        ModelKind::Slowtail => ModelSpec::SlowTail,
        ModelKind::Tabulated => ModelSpec::Tabulated {
            path: a
                .table
                .as_ref()
                .ok_or_else(|| anyhow!("--model tabulated needs --table"))?
                .to_string_lossy()
                .into_owned(),
            gamma: a.gamma.unwrap_or(0.0),
            c_alpha: a.c_alpha,
            extrapolate: a.extrapolate,
        },
    })
}

/// Build the model and reject it if validation fails.
fn checked_model(a: &ModelArgs) -> Result<Model> {
    let m = model_spec(a)?.build(None)?;
    validate_model(&m).into_result()?;
    Ok(m)
}

fn model(c: ModelCmd) -> Result<bool> {
    echo_config("model", &c)?;
    let m = model_spec(&c.model)?.build(None)?;
    let report = validate_model(&m);
    let c_alpha = if report.passed { Some(c_alpha_limit(&m, 4)?) } else { None };
    if c.json {
        let out = serde_json::json!({
            "validation": report,
            "declared_c_alpha": m.declared_c_alpha(),
            "c_alpha_estimate": c_alpha,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("model: {}", m.label());
        println!("gamma: {}", m.gamma());
        for chk in &report.checks {
            println!("  {:?} {:?}: {}", chk.kind, chk.status, chk.detail);
        }
        if let Some(d) = m.declared_c_alpha() {
            println!("declared c_alpha: {d}");
        }
        if let Some(est) = &c_alpha {
            match est.limit {
                Some(l) => println!("c_alpha estimate: {l:.6e} ± {:.1e}", est.uncertainty.unwrap_or(0.0)),
                None => println!("c_alpha estimate: {}", est.note),
            }
        }
        println!("{}", report.summary());
    }
    Ok(report.passed)
}

fn norming(c: NormingCmd) -> Result<()> {
    echo_config("norming", &c)?;
    let m = checked_model(&c.model)?;
    let rows = c
        .r
        .iter()
        .map(|&r| norming_sequences(&m, r))
        .collect::<tlp_core::Result<Vec<_>>>()?;
    if c.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        for ns in rows {
            println!("r={} a={:.5e} b={:.5e}", ns.r, ns.a_r, ns.b_r);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MomentRow {
    p: f64,
    t: f64,
    value: f64,
    method: tlp_core::Method,
    est_error: f64,
    /// `σ²(t)/(t²Π̄(t))` when `p = 2`.
    c_alpha_ratio: Option<f64>,
}

fn moments(c: MomentsCmd) -> Result<()> {
    echo_config("moments", &c)?;
    let m = checked_model(&c.model)?;
    let mut rows = Vec::with_capacity(c.t.len());
    for &t in &c.t {
        let mo = truncated_moment(&m, c.p, t)?;
        let ratio = if c.p == 2.0 { c_alpha_ratio(&m, t).ok() } else { None };
        rows.push(MomentRow {
            p: c.p,
            t,
            value: mo.value,
            method: mo.method,
            est_error: mo.est_error,
            c_alpha_ratio: ratio,
        });
    }
    let limit = if c.limit { Some(c_alpha_limit(&m, 4)?) } else { None };
    if c.json {
        let out = serde_json::json!({ "moments": rows, "c_alpha_estimate": limit });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    for r in &rows {
        print!("p={} t={} value={:.10e} method={:?} est_error={:.1e}", r.p, r.t, r.value, r.method, r.est_error);
        if let Some(q) = r.c_alpha_ratio {
            print!(" ratio={q:.10e}");
        }
        println!();
    }
    if let Some(est) = limit {
        match est.limit {
            Some(l) => println!("c_alpha limit: {l:.10e} ± {:.1e}", est.uncertainty.unwrap_or(0.0)),
            None => println!("c_alpha limit: {}", est.note),
        }
    }
    Ok(())
}

/// One row of the `simulate` output.
#[derive(Serialize, Deserialize)]
struct SampleRow {
    replicate: u64,
    col1: f64,
    col2: f64,
    delta_r: f64,
    trimmed_x: f64,
    truncation_index: u64,
    tail_sd: f64,
}

fn simulate(c: SimulateCmd) -> Result<()> {
    echo_config("simulate", &c)?;
    let m = checked_model(&c.model)?;
    let opts = SimOptions {
        rel_tol: c.sim.rel_tol,
        mode: c.sim.mode,
        max_points: c.sim.max_points,
    };
    let norm = Normalizer::new(&m, c.scheme, c.r, c.sim.t)?;
    let samples = sample_trimmed_batch(&m, c.r, c.sim.t, c.sim.n, c.sim.seed, &opts)?;
    let pairs = norm.apply_all(&m, &samples)?;
    write_artifact(c.out.as_deref(), |w| {
        let mut csv = csv::Writer::from_writer(w);
        for (i, (s, p)) in samples.iter().zip(&pairs).enumerate() {
            csv.serialize(SampleRow {
                replicate: i as u64,
                col1: p[0],
                col2: p[1],
                delta_r: s.delta_r,
                trimmed_x: s.trimmed_x(),
                truncation_index: s.truncation_index,
                tail_sd: s.tail_sd(),
            })?;
        }
        csv.flush()?;
        Ok(())
    })
}

fn law(a: &LawArgs) -> Result<LimitLaw> {
    Ok(make_limit_law(a.scheme, a.gamma, a.c_alpha, a.t)?)
}

fn limit(c: LimitCmd) -> Result<()> {
    echo_config("limit", &c)?;
    let law = law(&c.law)?;
    if let Some(n) = c.sample {
        let pairs = limit_sample(&law, RngStream::new(c.seed, 0), n);
        return write_artifact(c.out.as_deref(), |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["col1", "col2"])?;
            for p in pairs {
                csv.serialize(p)?;
            }
            csv.flush()?;
            Ok(())
        });
    }
    if c.cdf.is_empty() {
        bail!("limit needs --cdf or --sample");
    }
    let values = c
        .cdf
        .iter()
        .map(|&x| law.marginal_cdf(c.component as usize, x))
        .collect::<tlp_core::Result<Vec<_>>>()?;
    write_artifact(c.out.as_deref(), |w| {
        for v in values {
            writeln!(w, "{v:.6}")?;
        }
        Ok(())
    })
}

fn report_format(f: FormatArg) -> ReportFormat {
    match f {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Plotdata => ReportFormat::PlotData,
    }
}

fn run_and_emit(mut config: ExperimentConfig, base_dir: Option<&Path>, out: &ReportArgs, command: &str) -> Result<bool> {
    let format = report_format(out.format);
    if format == ReportFormat::PlotData {
        config.keep_plot_data = true;
    }
    echo_config(command, &config)?;
    let report = run_experiment(&config, base_dir)?;
    write_artifact(out.out.as_deref(), |w| Ok(emit_report(&report, format, w)?))?;
    summarize(&report);
    Ok(report.verdict)
}

fn summarize(report: &ExperimentReport) {
    for rec in &report.records {
        eprintln!(
            "r={} ks_col1={:.4} ks_col2={:.4} threshold={:.4} var_col1={:.4} corr={:.4} passed={}",
            rec.r, rec.ks_col1, rec.ks_col2, rec.ks_threshold, rec.sample_var_col1, rec.sample_corr, rec.passed
        );
    }
    if let Some(why) = &report.aborted {
        eprintln!("aborted: {why}");
    }
    eprintln!("verdict: {}", if report.verdict { "pass" } else { "fail" });
}

fn verify(c: VerifyCmd) -> Result<bool> {
    let config = ExperimentConfig::from_path(&c.config).with_context(|| format!("reading {}", c.config.display()))?;
    let base = c.config.parent();
    run_and_emit(config, base, &c.report, "verify")
}

fn repro_cmd(c: ReproCmd) -> Result<bool> {
    let mut config = repro::canned(&c.theorem)?;
    if let Some(n) = c.n {
        config.n = n;
    }
    if let Some(s) = c.seed {
        config.seed = s;
    }
    config.validate()?;
    run_and_emit(config, None, &c.report, "repro")
}

#[derive(Serialize)]
struct CdfRow {
    x: f64,
    empirical_cdf: f64,
    limit_cdf: f64,
}

#[derive(Serialize)]
struct QqRow {
    limit_quantile: f64,
    sample: f64,
}

fn read_columns(path: &Path) -> Result<[Vec<f64>; 2]> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rd = csv::Reader::from_reader(file);
    let mut cols = [Vec::new(), Vec::new()];
    for (i, row) in rd.deserialize::<SampleRow>().enumerate() {
        let row = row.with_context(|| format!("{}: malformed row {}", path.display(), i + 1))?;
        cols[0].push(row.col1);
        cols[1].push(row.col2);
    }
    if cols[0].is_empty() {
        bail!("{} holds no samples", path.display());
    }
    if cols.iter().flatten().any(|v| !v.is_finite()) {
        bail!("{} holds non-finite samples", path.display());
    }
    for c in &mut cols {
        c.sort_by(f64::total_cmp);
    }
    Ok(cols)
}

fn plot(c: PlotCmd) -> Result<()> {
    echo_config("plot", &c)?;
    let law = law(&c.law)?;
    let cols = read_columns(&c.samples)?;
    for (i, col) in cols.iter().enumerate() {
        let component = i + 1;
        let overlay = cdf_overlay(col, |x| law.marginal_cdf(component, x))?;
        let qq = qq_points(col, |p| marginal_quantile(&law, component, p))?;
        write_artifact(Some(&c.out.join(format!("cdf_col{component}.csv"))), |w| {
            let mut csv = csv::Writer::from_writer(w);
            for (x, empirical_cdf, limit_cdf) in overlay {
                csv.serialize(CdfRow {
                    x,
                    empirical_cdf,
                    limit_cdf,
                })?;
            }
            csv.flush()?;
            Ok(())
        })?;
        write_artifact(Some(&c.out.join(format!("qq_col{component}.csv"))), |w| {
            let mut csv = csv::Writer::from_writer(w);
            for (limit_quantile, sample) in qq {
                csv.serialize(QqRow { limit_quantile, sample })?;
            }
            csv.flush()?;
            Ok(())
        })?;
    }
    Ok(())
}
