//! `tlp`: command-line front end for the trimmed subordinator laboratory.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tlp_core::{ResidualMode, Scheme};

/// Exit status for a completed run whose verdict failed.
const EXIT_VERIFICATION: u8 = 3;
const EXIT_RUNTIME: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "tlp", version, about = "Trimmed subordinator simulation and verification")]
struct Cli {
    /// Worker thread cap.
    #[arg(long, global = true, env = "TLP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a model and print its regime.
    Model(ModelCmd),
    /// Norming sequences a_r and b_r.
    Norming(NormingCmd),
    /// Truncated moments and the c_alpha ratio.
    Moments(MomentsCmd),
    /// Draw trimmed sums and write the normalized pairs as CSV.
    Simulate(SimulateCmd),
    /// Query a limit law: marginal CDF or samples.
    Limit(LimitCmd),
    /// Run an experiment config.
    Verify(VerifyCmd),
    /// Run a canned experiment.
    Repro(ReproCmd),
    /// Empirical-versus-limit CDF and QQ data from a simulate CSV.
    Plot(PlotCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    Stable,
    Logpower,
    Slowtail,
    Tabulated,
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Stable index in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Log-power index, or the declared index of a table.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// CSV with header `x,tail` for `--model tabulated`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Declared c_alpha of a table.
    #[arg(long)]
    c_alpha: Option<f64>,
    /// Continue a table log-log linearly beyond its grid.
    #[arg(long)]
    extrapolate: bool,
}

#[derive(Debug, Args, Serialize)]
struct ModelCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct NormingCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// Trimming levels.
    #[arg(long, num_args = 1.., required = true)]
    r: Vec<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct MomentsCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// Moment order (1 or 2 for μ and σ²).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Truncation points.
    #[arg(long, num_args = 1.., required = true)]
    t: Vec<f64>,
    /// Also extrapolate lim σ²(x)/(x²Π̄(x)) as x ↓ 0.
    #[arg(long)]
    limit: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct SimOpts {
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
    #[arg(long, default_value_t = ResidualMode::GaussianResidual)]
    #[serde(serialize_with = "display")]
    mode: ResidualMode,
    #[arg(long, default_value_t = 10_000_000)]
    max_points: u64,
}

#[derive(Debug, Args, Serialize)]
struct SimulateCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    #[serde(serialize_with = "display")]
    scheme: Scheme,
    #[arg(long)]
    r: u64,
    #[command(flatten)]
    sim: SimOpts,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct LawArgs {
    #[arg(long)]
    #[serde(serialize_with = "display")]
    scheme: Scheme,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long)]
    c_alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

#[derive(Debug, Args, Serialize)]
struct LimitCmd {
    #[command(flatten)]
    law: LawArgs,
    /// Evaluate the marginal CDF at these points.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, conflicts_with = "sample")]
    cdf: Vec<f64>,
    /// Draw this many pairs from the law.
    #[arg(long)]
    sample: Option<usize>,
    /// Marginal queried by `--cdf`; 2 is the Δ coordinate.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    component: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Json,
    Csv,
    Plotdata,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Debug, Args, Serialize)]
struct VerifyCmd {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize)]
struct ReproCmd {
    /// Canned experiment id.
    #[arg(long)]
    theorem: String,
    /// Override the replicate count.
    #[arg(long)]
    n: Option<usize>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Debug, Args, Serialize)]
struct PlotCmd {
    /// CSV written by `simulate`.
    #[arg(long)]
    samples: PathBuf,
    #[command(flatten)]
    law: LawArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    match commands::dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
