//! Library surface of the `hgopa` command-line tool: the command
//! implementations, the report bundle and the text renderers. The binary in
//! `main.rs` only parses arguments and maps errors to exit codes.

pub mod commands;
pub mod report;
pub mod text;

pub use commands::{
    cmd_fit, cmd_gain, cmd_overlap, cmd_report, cmd_squeeze, cmd_threshold, quad_spec, FitRequest,
    GainData, GainOutput, SqueezeOutput,
};
pub use report::{
    EfficiencyTable, ExperimentalThresholds, GainSummary, Provenance, ReportBundle, Series,
    ThresholdTable,
};
