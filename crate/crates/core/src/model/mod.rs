//! Lévy tail models.
//!
//! A model is described by its tail `Π̄(x) = Π(x, ∞)` on `(0, ∞)` together
//! with the generalized inverse `Π̄^←(y) = inf{x > 0 : Π̄(x) ≤ y}`. Both are
//! exposed on a log scale in `x`: the centering `Π̄^←(r)` of the slowly
//! varying families drops below the smallest positive double long before the
//! trimming level gets interesting, so every quantity downstream is formed
//! from logarithms and exponentiated last.

mod tabulated;
mod validate;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use tabulated::TabulatedModel;
pub use validate::{validate_model, CheckKind, CheckOutcome, CheckStatus, ValidationReport};

/// A driftless subordinator described by the tail of its Lévy measure.
///
/// Implementations are immutable and may be shared across threads.
pub trait LevyTail: fmt::Debug + Send + Sync {
    fn label(&self) -> String;

    /// Regime index of the limit function; never positive for an admissible model.
    fn gamma(&self) -> f64;

    /// `Π̄(e^log_x)`. Defined for every real `log_x` (including `-∞`).
    fn tail_at_log(&self, log_x: f64) -> Result<f64>;

    /// `ln Π̄^←(y)` for `y > 0`. Callers guarantee the sign of `y`.
    fn log_inverse(&self, y: f64) -> Result<f64>;

    /// `Π̄^←(y)` on the natural scale.
    fn inverse(&self, y: f64) -> Result<f64> {
        Ok(self.log_inverse(y)?.exp())
    }

    /// `ln` of the right end of the support of `Π`.
    fn log_support_edge(&self) -> f64 {
        f64::INFINITY
    }

    /// `ln ∫_0^t u^p Π(du)` in closed form, when the family has one.
    fn analytic_log_moment(&self, _p: f64, _log_t: f64) -> Option<f64> {
        None
    }

    /// `(ln a_r, ln b_r)` when the family prescribes its own norming.
    fn analytic_norming(&self, _r: f64) -> Option<(f64, f64)> {
        None
    }

    /// Limit of `σ²(x) / (x² Π̄(x))` as `x ↓ 0`, when known for the family.
    fn declared_c_alpha(&self) -> Option<f64> {
        None
    }
}

/// `Π̄(x)` with the domain check `x > 0`.
pub fn tail<M: LevyTail + ?Sized>(model: &M, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("tail argument", x));
    }
    model.tail_at_log(x.ln())
}

/// `Π̄^←(y)` with the domain check `y > 0`.
pub fn tail_inverse<M: LevyTail + ?Sized>(model: &M, y: f64) -> Result<f64> {
    if !(y > 0.0) || y.is_nan() {
        return Err(Error::domain("tail inverse argument", y));
    }
    model.inverse(y)
}

/// `ln Π̄^←(y)` with the domain check `y > 0`.
pub fn log_tail_inverse<M: LevyTail + ?Sized>(model: &M, y: f64) -> Result<f64> {
    if !(y > 0.0) || y.is_nan() {
        return Err(Error::domain("tail inverse argument", y));
    }
    model.log_inverse(y)
}

/// The stable subordinator: `Π̄(x) = x^{-α}` on `(0, ∞)`, `0 < α < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableModel {
    alpha: f64,
}

impl StableModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidModel(format!(
                "stable index must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.alpha / (2.0 - self.alpha)
    }
}

impl LevyTail for StableModel {
    fn label(&self) -> String {
        format!("stable(alpha={})", self.alpha)
    }

    fn gamma(&self) -> f64 {
        0.0
    }

    fn tail_at_log(&self, log_x: f64) -> Result<f64> {
        Ok((-self.alpha * log_x).exp())
    }

    fn log_inverse(&self, y: f64) -> Result<f64> {
        Ok(-y.ln() / self.alpha)
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        Ok(y.powf(-1.0 / self.alpha))
    }

    fn analytic_log_moment(&self, p: f64, log_t: f64) -> Option<f64> {
        let a = self.alpha;
        Some((a / (p - a)).ln() + (p - a) * log_t)
    }

    fn declared_c_alpha(&self) -> Option<f64> {
        Some(self.c_alpha())
    }
}

/// `Π̄(x) = (ln(1/x))² / γ²` on `(0, 1)`, zero beyond; a `γ < 0` family with
/// `Π̄^←(y) = e^{-|γ|√y}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogPowerModel {
    gamma: f64,
}

impl LogPowerModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma < 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidModel(format!(
                "log-power family needs a finite gamma < 0, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }
}

impl LevyTail for LogPowerModel {
    fn label(&self) -> String {
        format!("logpower(gamma={})", self.gamma)
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn tail_at_log(&self, log_x: f64) -> Result<f64> {
        if log_x >= 0.0 {
            return Ok(0.0);
        }
        Ok(log_x * log_x / (self.gamma * self.gamma))
    }

    fn log_inverse(&self, y: f64) -> Result<f64> {
        Ok(-self.gamma.abs() * y.sqrt())
    }

    fn log_support_edge(&self) -> f64 {
        0.0
    }

    fn analytic_log_moment(&self, p: f64, log_t: f64) -> Option<f64> {
        // ∫_{s0}^∞ 2s e^{-ks} ds with s = √u, k = p|γ|, s0 = ln(1/t)/|γ|.
        let g = self.gamma.abs();
        let k = p * g;
        let lt = log_t.min(0.0);
        let s0 = -lt / g;
        Some(std::f64::consts::LN_2 + p * lt + (s0 / k + 1.0 / (k * k)).ln())
    }

    fn declared_c_alpha(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `Π̄(x) = (ln(1/x))⁴` on `(0, 1)`, zero beyond; slowly varying at 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SlowTailModel;

impl LevyTail for SlowTailModel {
    fn label(&self) -> String {
        "slowtail".into()
    }

    fn gamma(&self) -> f64 {
        0.0
    }

    fn tail_at_log(&self, log_x: f64) -> Result<f64> {
        if log_x >= 0.0 {
            return Ok(0.0);
        }
        Ok(log_x.powi(4))
    }

    fn log_inverse(&self, y: f64) -> Result<f64> {
        Ok(-y.sqrt().sqrt())
    }

    fn log_support_edge(&self) -> f64 {
        0.0
    }

    fn analytic_log_moment(&self, p: f64, log_t: f64) -> Option<f64> {
        // ∫_{s0}^∞ 4s³ e^{-ps} ds with s = u^{1/4}, s0 = ln(1/t).
        let lt = log_t.min(0.0);
        let s = -lt;
        let poly = s.powi(3) / p + 3.0 * s * s / p.powi(2) + 6.0 * s / p.powi(3) + 6.0 / p.powi(4);
        Some(4f64.ln() + p * lt + poly.ln())
    }

    fn declared_c_alpha(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Model description as it appears in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Stable {
        alpha: f64,
    },
    #[serde(rename = "logpower")]
    LogPower {
        gamma: f64,
    },
    #[serde(rename = "slowtail")]
    SlowTail,
    Tabulated {
        path: String,
        #[serde(default)]
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_alpha: Option<f64>,
        /// Continue the table log-log linearly beyond both ends.
        #[serde(default)]
        extrapolate: bool,
    },
}

impl ModelSpec {
    /// Build the model. Relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<Model> {
        Ok(match self {
            ModelSpec::Stable { alpha } => Model::Stable(StableModel::new(*alpha)?),
            ModelSpec::LogPower { gamma } => Model::LogPower(LogPowerModel::new(*gamma)?),
            ModelSpec::SlowTail => Model::SlowTail(SlowTailModel),
            ModelSpec::Tabulated {
                path,
                gamma,
                c_alpha,
                extrapolate,
            } => {
                let p = Path::new(path);
                let full = match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.to_path_buf(),
                };
                let mut m = TabulatedModel::from_csv_path(&full)?;
                m.set_gamma(*gamma);
                m.set_c_alpha(*c_alpha);
                m.set_extrapolate(*extrapolate);
                Model::Tabulated(m)
            }
        })
    }
}

/// The built-in model families behind one type.
#[derive(Clone, Debug)]
pub enum Model {
    Stable(StableModel),
    LogPower(LogPowerModel),
    SlowTail(SlowTailModel),
    Tabulated(TabulatedModel),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Stable($m) => $e,
            Model::LogPower($m) => $e,
            Model::SlowTail($m) => $e,
            Model::Tabulated($m) => $e,
        }
    };
}

impl LevyTail for Model {
    fn label(&self) -> String {
        delegate!(self, m => m.label())
    }
    fn gamma(&self) -> f64 {
        delegate!(self, m => m.gamma())
    }
    fn tail_at_log(&self, log_x: f64) -> Result<f64> {
        delegate!(self, m => m.tail_at_log(log_x))
    }
    fn log_inverse(&self, y: f64) -> Result<f64> {
        delegate!(self, m => m.log_inverse(y))
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        delegate!(self, m => m.inverse(y))
    }
    fn log_support_edge(&self) -> f64 {
        delegate!(self, m => m.log_support_edge())
    }
    fn analytic_log_moment(&self, p: f64, log_t: f64) -> Option<f64> {
        delegate!(self, m => m.analytic_log_moment(p, log_t))
    }
    fn analytic_norming(&self, r: f64) -> Option<(f64, f64)> {
        delegate!(self, m => m.analytic_norming(r))
    }
    fn declared_c_alpha(&self) -> Option<f64> {
        delegate!(self, m => m.declared_c_alpha())
    }
}
