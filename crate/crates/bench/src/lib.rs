//! Fixtures shared by the benchmarks.

use tlp_core::{LogPowerModel, Model, SlowTailModel, StableModel};

/// The three built-in families at the parameters used in the acceptance runs.
pub fn reference_models() -> Vec<(&'static str, Model)> {
    vec![
        ("stable-0.5", Model::Stable(StableModel::new(0.5).expect("valid index"))),
        ("logpower-1", Model::LogPower(LogPowerModel::new(-1.0).expect("valid gamma"))),
        ("slowtail", Model::SlowTail(SlowTailModel)),
    ]
}
