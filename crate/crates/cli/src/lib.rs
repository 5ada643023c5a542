//! Scenario files, deterministic CSV output and the `rydfm` command line.

pub mod commands;
pub mod output;
pub mod scenario;

pub use commands::{execute, run, CliError, Invocation, Subcommand};
pub use output::{Artifact, RunInfo, RunManifest};
pub use scenario::{parse_scenario, ConfigError, Scenario};
