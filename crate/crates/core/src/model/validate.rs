use serde::{Deserialize, Serialize};

use super::{LevyTail, Model};
use crate::error::Error;
use crate::moments::log_moment;

/// Probe grid for the monotonicity check: `x = 10^k`, `k ∈ [-12, 6]`.
const MONO_PROBES: usize = 361;
/// Round-trip probes: 100 log-spaced `y ∈ [1e-2, 1e8]`.
const ROUND_TRIP_PROBES: usize = 100;
const ROUND_TRIP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    GammaRegime,
    Monotone,
    InfiniteActivity,
    Integrability,
    InverseRoundTrip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check could not be evaluated, e.g. a table does not reach far enough.
    Unverifiable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub kind: CheckKind,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub model: String,
    pub gamma: f64,
    pub checks: Vec<CheckOutcome>,
    /// No check failed.
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn summary(&self) -> String {
        if self.passed {
            return format!("{}: all checks passed", self.model);
        }
        let reasons: Vec<String> = self.failures().map(|c| c.detail.clone()).collect();
        format!("{}: {}", self.model, reasons.join("; "))
    }

    /// Turn a failing report into an error.
    pub fn into_result(self) -> crate::Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::Rejected(Box::new(self)))
        }
    }
}

fn outcome(kind: CheckKind, status: CheckStatus, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        kind,
        status,
        detail: detail.into(),
    }
}

fn unverifiable_or_fail(kind: CheckKind, e: &Error, ctx: &str) -> CheckOutcome {
    match e {
        Error::Extrapolation { .. } => outcome(kind, CheckStatus::Unverifiable, format!("{ctx}: {e}")),
        _ => outcome(kind, CheckStatus::Fail, format!("{ctx}: {e}")),
    }
}

fn check_gamma(model: &Model) -> CheckOutcome {
    let g = model.gamma();
    if g > 0.0 {
        outcome(
            CheckKind::GammaRegime,
            CheckStatus::Fail,
            format!("gamma = {g}: regime excluded, gamma > 0 cannot arise for positive jumps"),
        )
    } else if !g.is_finite() {
        outcome(CheckKind::GammaRegime, CheckStatus::Fail, format!("gamma = {g} is not finite"))
    } else {
        outcome(CheckKind::GammaRegime, CheckStatus::Pass, format!("gamma = {g}"))
    }
}

fn check_monotone(model: &Model) -> CheckOutcome {
    if let Model::Tabulated(t) = model {
        let (lx, ly) = t.log_grid();
        for i in 1..ly.len() {
            if ly[i] >= ly[i - 1] {
                let kind = if ly[i] == ly[i - 1] {
                    "flat segment (atom in the Lévy measure)"
                } else {
                    "tail increases"
                };
                return outcome(
                    CheckKind::Monotone,
                    CheckStatus::Fail,
                    format!(
                        "{kind} between x = {:.6e} and x = {:.6e}",
                        lx[i - 1].exp(),
                        lx[i].exp()
                    ),
                );
            }
        }
    }
    let mut prev = f64::INFINITY;
    let mut prev_x = 0.0;
    let mut probed = 0;
    for i in 0..MONO_PROBES {
        let lx = (-12.0 + 18.0 * i as f64 / (MONO_PROBES - 1) as f64) * std::f64::consts::LN_10;
        let v = match model.tail_at_log(lx) {
            Ok(v) => v,
            Err(Error::Extrapolation { .. }) => continue,
            Err(e) => return outcome(CheckKind::Monotone, CheckStatus::Fail, e.to_string()),
        };
        probed += 1;
        if !(v >= 0.0) || v > prev {
            return outcome(
                CheckKind::Monotone,
                CheckStatus::Fail,
                format!("tail not non-increasing near x = {:.6e} (after x = {prev_x:.6e})", lx.exp()),
            );
        }
        prev = v;
        prev_x = lx.exp();
    }
    if probed == 0 {
        return outcome(CheckKind::Monotone, CheckStatus::Unverifiable, "no probe point inside the table");
    }
    outcome(CheckKind::Monotone, CheckStatus::Pass, format!("{probed} probe points"))
}

fn check_infinite_activity(model: &Model) -> CheckOutcome {
    let k = CheckKind::InfiniteActivity;
    let mut vals = Vec::new();
    for dec in (10..=300).step_by(10) {
        let lx = -(dec as f64) * std::f64::consts::LN_10;
        match model.tail_at_log(lx) {
            Ok(v) => vals.push(v),
            Err(e) => return unverifiable_or_fail(k, &e, &format!("tail at 1e-{dec}")),
        }
    }
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let last = *vals.last().expect("probes");
    if increasing && last >= 2.0 * vals[0] {
        outcome(k, CheckStatus::Pass, format!("tail(1e-300) = {last:.4e}"))
    } else {
        outcome(
            k,
            CheckStatus::Fail,
            format!("tail does not grow without bound toward 0 (tail(1e-300) = {last:.4e})"),
        )
    }
}

fn check_integrability(model: &Model) -> CheckOutcome {
    let k = CheckKind::Integrability;
    let lt = model.log_support_edge().min(0.0);
    match log_moment(model, 1.0, lt) {
        Ok(v) if v.is_finite() => outcome(k, CheckStatus::Pass, format!("mu(1) = {:.6e}", v.exp())),
        Ok(v) => outcome(k, CheckStatus::Fail, format!("mu(1) is not finite ({v})")),
        Err(e) => unverifiable_or_fail(k, &e, "mu(1)"),
    }
}

fn check_round_trip(model: &Model) -> CheckOutcome {
    let k = CheckKind::InverseRoundTrip;
    let mut worst: f64 = 0.0;
    let mut probed = 0;
    for i in 0..ROUND_TRIP_PROBES {
        let y = 10f64.powf(-2.0 + 10.0 * i as f64 / (ROUND_TRIP_PROBES - 1) as f64);
        let back = model.log_inverse(y).and_then(|lx| model.tail_at_log(lx));
        match back {
            Ok(b) => {
                probed += 1;
                worst = worst.max(((b - y) / y).abs());
            }
            Err(Error::Extrapolation { .. }) => continue,
            Err(e) => return outcome(k, CheckStatus::Fail, format!("y = {y:.4e}: {e}")),
        }
    }
    if probed == 0 {
        return outcome(k, CheckStatus::Unverifiable, "no probe level inside the table");
    }
    let status = if worst <= ROUND_TRIP_TOL {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    outcome(k, status, format!("worst relative round-trip error {worst:.3e} over {probed} levels"))
}

/// Run every admissibility check on `model`.
pub fn validate_model(model: &Model) -> ValidationReport {
    let checks = vec![
        check_gamma(model),
        check_monotone(model),
        check_infinite_activity(model),
        check_integrability(model),
        check_round_trip(model),
    ];
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    ValidationReport {
        model: model.label(),
        gamma: model.gamma(),
        checks,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LogPowerModel, SlowTailModel, StableModel, TabulatedModel};

    #[test]
    fn builtins_pass() {
        for m in [
            Model::Stable(StableModel::new(0.5).unwrap()),
            Model::LogPower(LogPowerModel::new(-1.0).unwrap()),
            Model::SlowTail(SlowTailModel),
        ] {
            let rep = validate_model(&m);
            assert!(rep.passed, "{}", rep.summary());
            assert!(rep.checks.iter().all(|c| c.status == CheckStatus::Pass), "{rep:?}");
        }
        let rep = validate_model(&Model::Stable(StableModel::new(0.5).unwrap()));
        assert_eq!(rep.gamma, 0.0);
    }

    #[test]
    fn positive_gamma_is_rejected() {
        let mut t = TabulatedModel::from_points(&[0.1, 1.0], &[10.0, 1.0]).unwrap();
        t.set_gamma(1.0);
        t.set_extrapolate(true);
        let rep = validate_model(&Model::Tabulated(t));
        assert!(!rep.passed);
        let f: Vec<_> = rep.failures().collect();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, CheckKind::GammaRegime);
        assert!(rep.clone().into_result().is_err());
    }

    #[test]
    fn repeated_tail_value_is_rejected_as_atom() {
        let t = TabulatedModel::from_points(&[0.01, 0.1, 0.5, 1.0], &[100.0, 10.0, 10.0, 1.0]).unwrap();
        let rep = validate_model(&Model::Tabulated(t));
        assert!(!rep.passed);
        let f = rep.failures().next().unwrap();
        assert_eq!(f.kind, CheckKind::Monotone);
        assert!(f.detail.contains("flat segment"));
    }

    #[test]
    fn extrapolated_power_table_passes() {
        let xs: Vec<f64> = (0..=20).map(|i| 10f64.powf(-6.0 + 0.3 * i as f64)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-0.5)).collect();
        let mut t = TabulatedModel::from_points(&xs, &ys).unwrap();
        t.set_extrapolate(true);
        let rep = validate_model(&Model::Tabulated(t));
        assert!(rep.passed, "{}", rep.summary());
    }

    #[test]
    fn finite_table_without_extrapolation_is_unverifiable_not_failed() {
        let t = TabulatedModel::from_points(&[0.01, 0.1, 1.0], &[100.0, 10.0, 1.0]).unwrap();
        let rep = validate_model(&Model::Tabulated(t));
        assert!(rep.passed);
        assert!(rep.checks.iter().any(|c| c.status == CheckStatus::Unverifiable));
    }
}
