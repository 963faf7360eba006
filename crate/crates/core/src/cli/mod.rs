//! Config parsing, command dispatch and the invariant suite behind the binary.

mod check;
mod config;
mod run;

pub use check::{run_check, CheckItem, CheckSummary};
pub use config::{
    default_resonance_queries, kind_name, parse_config, CheckSection, ConvergeSection, DepthInput, EquationInput,
    EvolveSection, GridInput, ResonanceSection, RunConfig, SensitivityInput, SymbolsSection, Tolerances,
    SCHEMA_VERSION,
};
pub use run::{
    error_failures, failure_document, output_prefix, run, version_stamp, Command, Failure, Outcome, TOOL_NAME,
    TOOL_VERSION,
};
