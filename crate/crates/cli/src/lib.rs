//! Command-line layer for the Boussinesq patch laboratory: plain-text
//! configuration, the simulation run loop with all on-disk artifacts, the
//! geometry-lemma sweep driver, and snapshot-based recomputation.
//!
//! The binary exposes three subcommands — `simulate <config>`,
//! `verify-lemmas <config>`, `diagnose <run-dir>` — with exit codes
//! 0 (success), 1 (usage/config), 2 (numerical abort), 3 (invariant
//! violation). Library entry points: [`run::simulate`],
//! [`lemma_driver::verify_lemmas`], [`diagnose::diagnose`].

pub mod config;
pub mod diagnose;
pub mod error;
pub mod io;
pub mod lemma_driver;
pub mod run;

pub use config::{LemmaConfig, RunConfig};
pub use error::CliError;
