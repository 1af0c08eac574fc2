//! Configuration-driven runs of the debt-run solvers.
//!
//! Every command reads a TOML [`RunConfig`], writes CSV/JSON files
//! atomically into an output directory and finishes with a
//! `manifest.json` that records the resolved configuration, the seeds and
//! the SHA-256 of every output, so [`replay`] can reproduce a run exactly.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{replay, run, sup_gaps, CliError, RunOptions, SimulationSummary};
pub use config::{Command, CompareConfig, ConfigErrors, McConfig, RunConfig, SimulateConfig, SweepConfig, Tenor, TenorConfig, TenorPair};
pub use output::{Manifest, MANIFEST_FILE, SCHEMA_VERSION};
