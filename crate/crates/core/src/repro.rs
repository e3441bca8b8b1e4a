//! Canned experiments, one per limit statement, with pinned seeds and
//! tolerances. The JSON files live in `repro/` at the crate root.

use crate::error::{Error, Result};
use crate::verify::ExperimentConfig;

/// `(id, file name, contents)`.
pub const CANNED: [(&str, &str, &str); 8] = [
    ("1.10", "delta-marginal-stable.json", include_str!("../repro/delta-marginal-stable.json")),
    ("2.1", "conditional-clt-stable.json", include_str!("../repro/conditional-clt-stable.json")),
    ("2.2", "joint-random-stable.json", include_str!("../repro/joint-random-stable.json")),
    ("2.3i", "negative-regime-logpower.json", include_str!("../repro/negative-regime-logpower.json")),
    ("2.3ii", "deterministic-scale-stable.json", include_str!("../repro/deterministic-scale-stable.json")),
    ("2.4i", "deterministic-center-stable.json", include_str!("../repro/deterministic-center-stable.json")),
    ("2.4ii", "slow-tail-center.json", include_str!("../repro/slow-tail-center.json")),
    ("7.1", "general-horizon-stable.json", include_str!("../repro/general-horizon-stable.json")),
];

pub fn ids() -> impl Iterator<Item = &'static str> {
    CANNED.iter().map(|c| c.0)
}

/// The canned config for `id`.
pub fn canned(id: &str) -> Result<ExperimentConfig> {
    let (_, _, text) = CANNED
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::Config(format!("no canned experiment `{id}`; known: {}", ids().collect::<Vec<_>>().join(", "))))?;
    ExperimentConfig::from_json(text)
}
