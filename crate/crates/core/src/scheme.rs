//! Normalization schemes, one per limit statement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Each scheme fixes how a pair `(^(r)X, Δ^(r))` is normalized and which
/// limit law the normalized pair is compared with.
///
/// | scheme | column 1 | column 2 |
/// |---|---|---|
/// | `COND_CLT`, `JOINT_RANDOM` | `(X − μ(Δ))/σ(Δ)` | `(Δ − b_r)/a_r` |
/// | `NEG_DET_SCALE` | `(X − μ(Δ))/σ(b_r)` | `Δ/b_r` |
/// | `NEG_DET_CENTER` | `(X − μ(b_r))/(b_r√r)` | `Δ/b_r` |
/// | `G0_DET_SCALE` | `(X − μ(Δ))/σ(b_r)` | `(Δ − b_r)/a_r` |
/// | `RV_DET_CENTER` | `(X − μ(b_r))/σ(b_r)` | `(Δ − b_r)/a_r` |
/// | `SLOW_DET_CENTER` | `(X − μ(b_r))/(b_r√r)` | `(Δ − b_r)/a_r` |
/// | `DELTA_ONLY` | `(X − tμ(Δ))/√(tσ²(Δ))` | `(Δ − b_{r/t})/a_{r/t}` |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scheme {
    CondClt,
    JointRandom,
    NegDetScale,
    NegDetCenter,
    G0DetScale,
    RvDetCenter,
    SlowDetCenter,
    DeltaOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::CondClt,
        Scheme::JointRandom,
        Scheme::NegDetScale,
        Scheme::NegDetCenter,
        Scheme::G0DetScale,
        Scheme::RvDetCenter,
        Scheme::SlowDetCenter,
        Scheme::DeltaOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CondClt => "COND_CLT",
            Scheme::JointRandom => "JOINT_RANDOM",
            Scheme::NegDetScale => "NEG_DET_SCALE",
            Scheme::NegDetCenter => "NEG_DET_CENTER",
            Scheme::G0DetScale => "G0_DET_SCALE",
            Scheme::RvDetCenter => "RV_DET_CENTER",
            Scheme::SlowDetCenter => "SLOW_DET_CENTER",
            Scheme::DeltaOnly => "DELTA_ONLY",
        }
    }

    /// Column 2 is the ratio `Δ/b_r` rather than `(Δ − b_r)/a_r`.
    pub fn ratio_delta(self) -> bool {
        matches!(self, Scheme::NegDetScale | Scheme::NegDetCenter)
    }

    /// Check the scheme against a regime. `c_alpha` is the model's ratio
    /// limit when known.
    pub fn check_compatible(self, gamma: f64, c_alpha: Option<f64>, t: f64) -> Result<()> {
        if !(gamma <= 0.0) || !gamma.is_finite() {
            return Err(Error::incompatible(self, format!("gamma = {gamma} is outside the covered regimes")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::incompatible(self, format!("horizon t = {t} must be positive")));
        }
        if t != 1.0 && self != Scheme::DeltaOnly {
            return Err(Error::incompatible(self, "only DELTA_ONLY has a limit law for t != 1"));
        }
        match self {
            Scheme::CondClt | Scheme::JointRandom | Scheme::DeltaOnly => Ok(()),
            Scheme::NegDetScale | Scheme::NegDetCenter => {
                if gamma < 0.0 {
                    Ok(())
                } else {
                    Err(Error::incompatible(self, "requires gamma < 0"))
                }
            }
            Scheme::G0DetScale => {
                if gamma == 0.0 {
                    Ok(())
                } else {
                    Err(Error::incompatible(self, "requires gamma = 0"))
                }
            }
            Scheme::RvDetCenter | Scheme::SlowDetCenter => {
                if gamma != 0.0 {
                    return Err(Error::incompatible(self, "requires gamma = 0"));
                }
                let ok = match (self, c_alpha) {
                    (Scheme::RvDetCenter, Some(c)) => c > 0.0 && c <= 1.0,
                    (Scheme::SlowDetCenter, Some(c)) => c == 0.0,
                    _ => false,
                };
                if ok {
                    Ok(())
                } else {
                    let need = if self == Scheme::RvDetCenter {
                        "c_alpha in (0, 1]"
                    } else {
                        "c_alpha = 0"
                    };
                    Err(Error::incompatible(
                        self,
                        format!("no deterministic-centering limit law known (needs {need}, model has {c_alpha:?})"),
                    ))
                }
            }
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == up)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
            assert_eq!(serde_json::from_str::<Scheme>(&json).unwrap(), s);
        }
        assert!("BOGUS".parse::<Scheme>().is_err());
    }

    #[test]
    fn regime_mismatches_are_rejected() {
        assert!(Scheme::RvDetCenter.check_compatible(-1.0, Some(0.0), 1.0).is_err());
        assert!(Scheme::RvDetCenter.check_compatible(0.0, Some(1.0 / 3.0), 1.0).is_ok());
        assert!(Scheme::RvDetCenter.check_compatible(0.0, Some(0.0), 1.0).is_err());
        assert!(Scheme::SlowDetCenter.check_compatible(0.0, Some(0.0), 1.0).is_ok());
        assert!(Scheme::SlowDetCenter.check_compatible(0.0, None, 1.0).is_err());
        assert!(Scheme::NegDetScale.check_compatible(0.0, None, 1.0).is_err());
        assert!(Scheme::G0DetScale.check_compatible(-0.5, None, 1.0).is_err());
        assert!(Scheme::CondClt.check_compatible(0.0, None, 4.0).is_err());
        assert!(Scheme::DeltaOnly.check_compatible(0.0, None, 4.0).is_ok());
        assert!(Scheme::CondClt.check_compatible(1.0, None, 1.0).is_err());
    }
}
