//! Simulation and verification of large-trimming limit theorems for
//! driftless subordinators.
//!
//! The crate is organised bottom-up: [`model`] describes Lévy tails,
//! [`norming`] and [`moments`] compute the deterministic quantities,
//! [`simulate`] draws trimmed sums from the jump series, [`limit_laws`]
//! holds the limiting distributions and [`verify`] compares the two.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod limit_laws;
pub mod model;
pub mod moments;
pub mod norming;
pub mod quadrature;
pub mod repro;
pub mod rng;
pub mod scheme;
pub mod simulate;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use limit_laws::{delta_limit_cdf, limit_sample, make_limit_law, LawMoments, LimitLaw};
pub use model::{
    log_tail_inverse, tail, tail_inverse, validate_model, LevyTail, LogPowerModel, Model, ModelSpec, SlowTailModel,
    StableModel, TabulatedModel, ValidationReport,
};
pub use moments::{c_alpha_limit, c_alpha_ratio, truncated_moment, CAlphaEstimate, Method, TruncatedMoment};
pub use norming::{dehaan_v_check, empirical_h, h_fn, h_inverse_fn, norming_sequences, NormingSequences};
pub use rng::RngStream;
pub use scheme::Scheme;
pub use simulate::{
    gamma_sequence, sample_normalized, sample_trimmed, JumpSeries, Normalizer, ResidualMode, SimOptions, TrimmedSample,
};
pub use verify::{emit_report, ks_statistic, run_experiment, ExperimentConfig, ExperimentReport, ReportFormat};
