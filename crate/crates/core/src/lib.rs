//! Numerical modeling and data reduction for optical parametric
//! amplification in higher-order Hermite-Gauss transverse modes.
//!
//! The crate computes pump-signal mode-overlap coefficients, oscillation
//! threshold scaling, phase-matching envelopes and below-threshold squeezing
//! variances, and reduces measured gain curves and squeezing levels into
//! threshold estimates and detection-chain loss budgets.
//!
//! Modules follow the processing chain:
//!
//! * [`quadrature`], [`hg`]: Hermite polynomials, normalized 1D
//!   Hermite-Gauss modes and the integration engine behind every overlap.
//! * [`overlap`]: squared-signal normalizations `alpha_n`, overlap
//!   coefficients `Gamma_ni`, optimal pump profiles and misaligned-seed
//!   decompositions.
//! * [`opa`]: classical gain, relative thresholds, phase-matching envelope
//!   and the zero-frequency squeezing variance.
//! * [`variance`], [`detection`]: dB/linear algebra, electronic-noise
//!   correction, efficiency chains and loss-budget inference.
//! * [`config`], [`curves`], [`fit`]: experiment configuration, CSV
//!   ingestion and least-squares threshold estimation.
//!
//! Everything is a pure function over immutable values; with the `parallel`
//! feature (on by default) the overlap tables and seed decompositions fan
//! out over rayon.

pub mod config;
pub mod curves;
pub mod detection;
pub mod error;
pub mod fit;
pub mod hg;
pub mod opa;
pub mod overlap;
mod parallel;
pub mod quadrature;
pub mod variance;

pub use config::{load_config, parse_config, ExperimentConfig, MODE_COUNT, MODE_LABELS};
pub use curves::{load_gain_csv, load_trace_csv, GainCurve, TraceSeries};
pub use detection::{
    apply_loss, back_out_cavity_escape, correct_electronic_noise, efficiency_from_spectrum,
    infer_source, DbPair, DetectionChain, LossBudgetEntry, SqueezingMeasurement, Uncertain,
};
pub use error::{Error, Result};
pub use fit::{fit_threshold, FitMethod, FitResult, ReferenceCurve};
pub use hg::{hermite_poly, mode_amplitude, BeamGeometry, BeamLabel, HGMode};
pub use opa::{
    classical_gain, escape_efficiency, phase_match_envelope, relative_threshold,
    squeezing_variance, CalibratedEnvelope, GainPhase, OpaParams, PhaseMatchSpec, QuadratureSign,
    RelativeThreshold,
};
pub use overlap::{
    alpha, gamma, misaligned_seed_closed_form, misaligned_seed_decomposition, OverlapTable,
    PumpProfile, SeedMisalignment,
};
pub use quadrature::{integrate, GaussHermiteRule, QuadratureMethod, QuadratureSpec};
pub use variance::{db_to_linear, linear_to_db, VarianceDb, VarianceLinear};
