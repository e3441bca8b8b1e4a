//! Jump-series simulation of `Δ_t^(r)` and `^(r)X_t`.
//!
//! The points `Γ_1 < Γ_2 < …` are partial sums of standard exponentials and
//! the `l`-th largest jump on `[0, t]` is `Π̄^←(Γ_l / t)`. Jumps are summed
//! in units of `2^k` with `2^k ≈ Π̄^←(r/t)`, so that series far below the
//! smallest double are still summed exactly in relative terms.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LevyTail;
use crate::moments::log_moment;
use crate::norming::{norming_sequences, NormingSequences};
use crate::rng::RngStream;
use crate::scheme::Scheme;
use crate::stats::NeumaierSum;

/// How the jumps beyond the truncation index are accounted for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// Add the conditional mean `t·μ(d_L)`; bitwise deterministic.
    Compensated,
    /// Add a normal draw with the conditional mean and variance, clamped at 0.
    #[default]
    GaussianResidual,
}

impl fmt::Display for ResidualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualMode::Compensated => "compensated",
            ResidualMode::GaussianResidual => "gaussian-residual",
        })
    }
}

impl FromStr for ResidualMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "compensated" => Ok(ResidualMode::Compensated),
            "gaussian-residual" | "gaussian" => Ok(ResidualMode::GaussianResidual),
            other => Err(Error::Config(format!("unknown residual mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub rel_tol: f64,
    pub mode: ResidualMode,
    /// Largest truncation index `L` a replicate may reach.
    pub max_points: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            mode: ResidualMode::GaussianResidual,
            max_points: 10_000_000,
        }
    }
}

impl SimOptions {
    pub(crate) fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Config(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_points == 0 {
            return Err(Error::Config("max_points must be positive".into()));
        }
        Ok(())
    }
}

/// One realization of `(Δ_t^(r), ^(r)X_t)`.
///
/// The trimmed sum and the residual statistics are stored in units of
/// `2^unit_exp`; use the accessors for natural or log values.
#[derive(Clone, Debug, PartialEq)]
pub struct TrimmedSample {
    pub r: u64,
    pub t: f64,
    pub unit_exp: i32,
    /// `Γ_r` (0 when `r = 0`).
    pub gamma_r: f64,
    /// `Δ_t^(r)`; `+∞` when `r = 0`. May underflow; see `log_delta`.
    pub delta_r: f64,
    pub log_delta: f64,
    pub trimmed_scaled: f64,
    pub tail_mean_scaled: f64,
    pub tail_sd_scaled: f64,
    /// Index `L` of the last explicitly summed point.
    pub truncation_index: u64,
    pub mode: ResidualMode,
}

impl TrimmedSample {
    pub fn unit(&self) -> f64 {
        2f64.powi(self.unit_exp)
    }

    pub fn log_unit(&self) -> f64 {
        self.unit_exp as f64 * LN_2
    }

    pub fn trimmed_x(&self) -> f64 {
        self.trimmed_scaled * self.unit()
    }

    pub fn log_trimmed_x(&self) -> f64 {
        self.trimmed_scaled.ln() + self.log_unit()
    }

    pub fn tail_mean(&self) -> f64 {
        self.tail_mean_scaled * self.unit()
    }

    pub fn tail_sd(&self) -> f64 {
        self.tail_sd_scaled * self.unit()
    }

    /// `tail_sd / trimmed_x`, computed in units.
    pub fn achieved_rel_tol(&self) -> f64 {
        self.tail_sd_scaled / self.trimmed_scaled
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("time horizon", t));
    }
    Ok(())
}

/// `Γ_1, …, Γ_count`.
pub fn gamma_sequence(stream: RngStream, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Config("gamma_sequence needs count >= 1".into()));
    }
    let mut rng = stream.rng();
    let mut g = 0.0;
    Ok((0..count)
        .map(|_| {
            g += rng.sample::<f64, _>(Exp1);
            g
        })
        .collect())
}

/// The first `count` points of a series and their jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpSeries {
    pub t: f64,
    pub gammas: Vec<f64>,
    /// `ln Π̄^←(Γ_l / t)`.
    pub log_jumps: Vec<f64>,
}

impl JumpSeries {
    /// Uses the same draws as [`sample_trimmed`] on the same stream.
    pub fn generate<M: LevyTail + ?Sized>(model: &M, t: f64, stream: RngStream, count: usize) -> Result<Self> {
        check_t(t)?;
        let gammas = gamma_sequence(stream, count)?;
        let log_jumps = gammas.iter().map(|&g| model.log_inverse(g / t)).collect::<Result<_>>()?;
        Ok(Self { t, gammas, log_jumps })
    }

    pub fn jumps(&self) -> Vec<f64> {
        self.log_jumps.iter().map(|l| l.exp()).collect()
    }

    /// `Δ^(r)`, 1-based.
    pub fn delta(&self, r: usize) -> f64 {
        self.log_jumps[r - 1].exp()
    }
}

/// `Σ_{l=r+1}^{L} Δ^(l)` on a realized series, without residual.
pub fn trimmed_sum_at(series: &JumpSeries, r: usize, l: usize) -> f64 {
    series.log_jumps[r..l].iter().map(|v| v.exp()).collect::<NeumaierSum>().value()
}

fn unit_exponent<M: LevyTail + ?Sized>(model: &M, r: u64, t: f64) -> Result<i32> {
    let l = model.log_inverse((r.max(1)) as f64 / t)?;
    Ok((l / LN_2).round().clamp(-1000.0, 1000.0) as i32)
}

/// Only `Γ_r` and `ln Δ_t^(r)`.
pub fn sample_delta<M: LevyTail + ?Sized>(model: &M, r: u64, t: f64, stream: RngStream) -> Result<(f64, f64)> {
    check_t(t)?;
    if r == 0 {
        return Err(Error::domain("trimming level for a jump", 0.0));
    }
    let mut rng = stream.rng();
    let mut g = 0.0;
    for _ in 0..r {
        g += rng.sample::<f64, _>(Exp1);
    }
    Ok((g, model.log_inverse(g / t)?))
}

/// Draw `(Δ_t^(r), ^(r)X_t)`.
///
/// Points past `r` are summed until `√(t σ²(d_L)) ≤ rel_tol · S_L`, where
/// `S_L` is the explicit partial sum, then the residual for the omitted
/// jumps is added according to `opts.mode`.
pub fn sample_trimmed<M: LevyTail + ?Sized>(
    model: &M,
    r: u64,
    t: f64,
    stream: RngStream,
    opts: &SimOptions,
) -> Result<TrimmedSample> {
    check_t(t)?;
    opts.check()?;
    let mut rng = stream.rng();
    let mut g = 0.0;
    for _ in 0..r {
        g += rng.sample::<f64, _>(Exp1);
    }
    let (gamma_r, delta_r, log_delta) = if r == 0 {
        (0.0, f64::INFINITY, f64::INFINITY)
    } else {
        let y = g / t;
        (g, model.inverse(y)?, model.log_inverse(y)?)
    };
    let unit_exp = unit_exponent(model, r, t)?;
    let log_unit = unit_exp as f64 * LN_2;

    let mut acc = NeumaierSum::new();
    let mut l = r;
    let mut next_check = r.saturating_add(64).min(opts.max_points.max(r + 1));
    loop {
        while l < next_check {
            g += rng.sample::<f64, _>(Exp1);
            l += 1;
            acc.add((model.log_inverse(g / t)? - log_unit).exp());
        }
        let log_d = model.log_inverse(g / t)?;
        let mean = t * (log_moment(model, 1.0, log_d)? - log_unit).exp();
        let sd = (t * (log_moment(model, 2.0, log_d)? - 2.0 * log_unit).exp()).sqrt();
        let s = acc.value();
        let done = sd <= opts.rel_tol * s;
        if done || l >= opts.max_points {
            let residual = match opts.mode {
                ResidualMode::Compensated => mean,
                ResidualMode::GaussianResidual => {
                    let z: f64 = rng.sample(StandardNormal);
                    (mean + sd * z).max(0.0)
                }
            };
            let sample = TrimmedSample {
                r,
                t,
                unit_exp,
                gamma_r,
                delta_r,
                log_delta,
                trimmed_scaled: s + residual,
                tail_mean_scaled: mean,
                tail_sd_scaled: sd,
                truncation_index: l,
                mode: opts.mode,
            };
            if done {
                return Ok(sample);
            }
            return Err(Error::Budget {
                achieved: sd / s,
                partial: Box::new(sample),
            });
        }
        let step = ((l - r) / 16).max(64);
        next_check = l.saturating_add(step).min(opts.max_points);
    }
}

/// `n` independent samples; replicate `i` uses stream `(seed, i)`.
pub fn sample_trimmed_batch<M: LevyTail + ?Sized>(
    model: &M,
    r: u64,
    t: f64,
    n: usize,
    seed: u64,
    opts: &SimOptions,
) -> Result<Vec<TrimmedSample>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| sample_trimmed(model, r, t, RngStream::new(seed, i), opts))
        .collect()
}

/// Maps a [`TrimmedSample`] to the pair a scheme normalizes.
#[derive(Clone, Debug)]
pub struct Normalizer {
    pub scheme: Scheme,
    pub r: u64,
    pub t: f64,
    /// `(a, b)` at `r`, or at `r/t` for `DELTA_ONLY`.
    pub norming: NormingSequences,
    log_mu_b: f64,
    log_sigma_b: f64,
}

impl Normalizer {
    pub fn new<M: LevyTail + ?Sized>(model: &M, scheme: Scheme, r: u64, t: f64) -> Result<Self> {
        scheme.check_compatible(model.gamma(), model.declared_c_alpha(), t)?;
        if r < 2 {
            return Err(Error::incompatible(scheme, format!("trimming level r = {r} must be at least 2")));
        }
        let level = if scheme == Scheme::DeltaOnly { r as f64 / t } else { r as f64 };
        let norming = norming_sequences(model, level)?;
        let log_mu_b = log_moment(model, 1.0, norming.log_b)?;
        let log_sigma_b = 0.5 * log_moment(model, 2.0, norming.log_b)?;
        Ok(Self {
            scheme,
            r,
            t,
            norming,
            log_mu_b,
            log_sigma_b,
        })
    }

    pub fn apply<M: LevyTail + ?Sized>(&self, model: &M, s: &TrimmedSample) -> Result<[f64; 2]> {
        if s.r != self.r || s.t != self.t {
            return Err(Error::Config(format!(
                "sample drawn at (r, t) = ({}, {}) but normalizer built for ({}, {})",
                s.r, s.t, self.r, self.t
            )));
        }
        let unit = s.log_unit();
        let x = s.trimmed_scaled;
        let ns = &self.norming;
        let random_center = || -> Result<f64> { Ok(self.t * (log_moment(model, 1.0, s.log_delta)? - unit).exp()) };
        let det_center = || (self.log_mu_b - unit).exp();
        let b_sqrt_r = || (ns.log_b + 0.5 * (self.r as f64).ln() - unit).exp();
        let sigma_b = || (self.log_sigma_b - unit).exp();
        let (center, scale) = match self.scheme {
            Scheme::CondClt | Scheme::JointRandom | Scheme::DeltaOnly => {
                let v = self.t * (log_moment(model, 2.0, s.log_delta)? - 2.0 * unit).exp();
                (random_center()?, v.sqrt())
            }
            Scheme::NegDetScale | Scheme::G0DetScale => (random_center()?, sigma_b()),
            Scheme::RvDetCenter => (det_center(), sigma_b()),
            Scheme::NegDetCenter | Scheme::SlowDetCenter => (det_center(), b_sqrt_r()),
        };
        let col1 = (x - center) / scale;
        let col2 = if self.scheme.ratio_delta() {
            (s.log_delta - ns.log_b).exp()
        } else {
            (ns.log_b - ns.log_a).exp() * (s.log_delta - ns.log_b).exp_m1()
        };
        Ok([col1, col2])
    }

    pub fn apply_all<M: LevyTail + ?Sized>(&self, model: &M, samples: &[TrimmedSample]) -> Result<Vec<[f64; 2]>> {
        samples.par_iter().map(|s| self.apply(model, s)).collect()
    }
}

/// `n` normalized pairs for `scheme`.
#[allow(clippy::too_many_arguments)]
pub fn sample_normalized<M: LevyTail + ?Sized>(
    model: &M,
    scheme: Scheme,
    r: u64,
    t: f64,
    n: usize,
    seed: u64,
    opts: &SimOptions,
) -> Result<Vec<[f64; 2]>> {
    let norm = Normalizer::new(model, scheme, r, t)?;
    let samples = sample_trimmed_batch(model, r, t, n, seed, opts)?;
    norm.apply_all(model, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LogPowerModel, Model, SlowTailModel, StableModel};
    use crate::stats::ColumnSummary;

    fn stable() -> Model {
        Model::Stable(StableModel::new(0.5).unwrap())
    }

    fn compensated() -> SimOptions {
        SimOptions {
            mode: ResidualMode::Compensated,
            ..SimOptions::default()
        }
    }

    #[test]
    fn gamma_sequence_is_deterministic_and_increasing() {
        let a = gamma_sequence(RngStream::new(5, 0), 1000).unwrap();
        let b = gamma_sequence(RngStream::new(5, 0), 1000).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        assert!(gamma_sequence(RngStream::new(5, 0), 0).is_err());
    }

    #[test]
    fn spacings_have_unit_mean() {
        let g = gamma_sequence(RngStream::new(17, 2), 100_000).unwrap();
        let mut prev = 0.0;
        let gaps: Vec<f64> = g
            .iter()
            .map(|&x| {
                let d = x - prev;
                prev = x;
                d
            })
            .collect();
        let s = ColumnSummary::of(gaps.iter().copied());
        let se = (s.var / s.n as f64).sqrt();
        assert!((s.mean - 1.0).abs() <= 3.0 * se, "mean {} se {se}", s.mean);
    }

    #[test]
    fn law_of_large_numbers_for_gamma_points() {
        let hits = (0..1000u64)
            .into_par_iter()
            .filter(|&i| {
                let g = gamma_sequence(RngStream::new(99, i), 10_000).unwrap();
                let v = g[9_999] / 1e4;
                (0.97..=1.03).contains(&v)
            })
            .count();
        assert!(hits >= 990, "{hits}");
    }

    #[test]
    fn untrimmed_sample_reports_infinite_jump() {
        let s = sample_trimmed(&stable(), 0, 1.0, RngStream::new(1, 0), &compensated()).unwrap();
        assert_eq!(s.delta_r, f64::INFINITY);
        assert!(s.trimmed_x() > 0.0);
    }

    #[test]
    fn delta_is_inverse_of_gamma_point() {
        let m = stable();
        let s = sample_trimmed(&m, 3, 1.0, RngStream::new(42, 7), &compensated()).unwrap();
        let g = gamma_sequence(RngStream::new(42, 7), 3).unwrap();
        assert_eq!(s.gamma_r, g[2]);
        assert_eq!(s.delta_r, g[2].powf(-2.0));
    }

    #[test]
    fn ordered_jump_identity() {
        for m in [stable(), Model::SlowTail(SlowTailModel)] {
            let series = JumpSeries::generate(&m, 1.0, RngStream::new(3, 1), 20_000).unwrap();
            let l = 20_000;
            let full = trimmed_sum_at(&series, 0, l);
            let mut prev = full;
            for r in [1usize, 2, 5, 50, 500] {
                let head: NeumaierSum = (1..=r).map(|i| series.delta(i)).collect();
                let tr = trimmed_sum_at(&series, r, l);
                assert!(((tr + head.value()) - full).abs() <= 1e-12 * full);
                assert!(tr <= prev);
                prev = tr;
            }
            let js = series.jumps();
            assert!(js.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn compensated_mode_is_bitwise_reproducible() {
        let m = Model::LogPower(LogPowerModel::new(-1.0).unwrap());
        let a = sample_trimmed(&m, 20, 1.0, RngStream::new(8, 8), &compensated()).unwrap();
        let b = sample_trimmed(&m, 20, 1.0, RngStream::new(8, 8), &compensated()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncation_is_honest() {
        let opts = SimOptions::default();
        for m in [stable(), Model::SlowTail(SlowTailModel), Model::LogPower(LogPowerModel::new(-1.0).unwrap())] {
            for i in 0..50 {
                let s = sample_trimmed(&m, 10, 1.0, RngStream::new(2, i), &opts).unwrap();
                assert!(s.trimmed_x() >= 0.0);
                assert!(s.achieved_rel_tol() <= opts.rel_tol, "{}", s.achieved_rel_tol());
            }
        }
    }

    #[test]
    fn budget_error_carries_partial_sample() {
        let opts = SimOptions {
            max_points: 100,
            rel_tol: 1e-9,
            ..SimOptions::default()
        };
        match sample_trimmed(&stable(), 10, 1.0, RngStream::new(1, 1), &opts) {
            Err(Error::Budget { partial, achieved }) => {
                assert_eq!(partial.truncation_index, 100);
                assert!(achieved > 1e-9);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn horizon_scales_the_jumps() {
        let m = stable();
        let a = sample_trimmed(&m, 5, 4.0, RngStream::new(6, 0), &compensated()).unwrap();
        assert_eq!(a.delta_r, (a.gamma_r / 4.0).powf(-2.0));
    }

    #[test]
    fn conditional_mean_of_trimmed_sum() {
        // E[^(r)X − μ(Δ^(r))] = 0.
        let m = stable();
        let samples = sample_trimmed_batch(&m, 50, 1.0, 10_000, 2024, &SimOptions::default()).unwrap();
        let diffs: Vec<f64> = samples
            .iter()
            .map(|s| s.trimmed_x() - (log_moment(&m, 1.0, s.log_delta).unwrap()).exp())
            .collect();
        let c = ColumnSummary::of(diffs.iter().copied());
        let se = (c.var / c.n as f64).sqrt();
        assert!(c.mean.abs() <= 3.0 * se, "mean {} se {se}", c.mean);
    }

    #[test]
    fn delta_over_center_matches_gamma_oracle() {
        // E[(Γ_r/r)^{-2}] = r²/((r−1)(r−2)) for Γ_r ~ Gamma(r, 1).
        let r = 500u64;
        let m = stable();
        let ns = norming_sequences(&m, r as f64).unwrap();
        let ratios: Vec<f64> = (0..10_000u64)
            .into_par_iter()
            .map(|i| (sample_delta(&m, r, 1.0, RngStream::new(77, i)).unwrap().1 - ns.log_b).exp())
            .collect();
        let c = ColumnSummary::of(ratios.iter().copied());
        let rf = r as f64;
        let oracle = rf * rf / ((rf - 1.0) * (rf - 2.0));
        let se = (c.var / c.n as f64).sqrt();
        assert!((c.mean - oracle).abs() <= 3.0 * se, "{} vs {oracle} (se {se})", c.mean);
    }

    #[test]
    fn normalizer_rejects_mismatched_regimes() {
        let lp = Model::LogPower(LogPowerModel::new(-1.0).unwrap());
        assert!(matches!(
            Normalizer::new(&lp, Scheme::RvDetCenter, 100, 1.0),
            Err(Error::IncompatibleScheme { .. })
        ));
        assert!(Normalizer::new(&stable(), Scheme::NegDetScale, 100, 1.0).is_err());
        assert!(Normalizer::new(&stable(), Scheme::DeltaOnly, 1, 1.0).is_err());
    }

    #[test]
    fn normalized_columns_use_the_right_norming() {
        let m = stable();
        let opts = compensated();
        let s = sample_trimmed(&m, 200, 4.0, RngStream::new(1, 3), &opts).unwrap();
        let n = Normalizer::new(&m, Scheme::DeltaOnly, 200, 4.0).unwrap();
        let pair = n.apply(&m, &s).unwrap();
        let ns = norming_sequences(&m, 50.0).unwrap();
        let direct = (s.delta_r - ns.b_r) / ns.a_r;
        assert!((pair[1] - direct).abs() < 1e-9 * direct.abs().max(1.0));
        let mu = 4.0 * (log_moment(&m, 1.0, s.log_delta).unwrap()).exp();
        let sd = (4.0 * (log_moment(&m, 2.0, s.log_delta).unwrap()).exp()).sqrt();
        let direct1 = (s.trimmed_x() - mu) / sd;
        assert!((pair[0] - direct1).abs() < 1e-6 * direct1.abs().max(1.0));
    }
}
