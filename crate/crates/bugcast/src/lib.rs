//! Release-level bug prediction for long-lived projects.
//!
//! The pipeline: reconstruct per-release bug counts from an issue-tracker
//! export, mine code and process metrics from the project's git history at
//! each release's code freeze, screen metrics by correlation against the bug
//! counts, fit a small linear model, and evaluate its predictions on later
//! releases.
//!
//! Most capabilities are demonstrated end to end in `examples/`; the
//! `bugcast` binary wraps the same library calls behind subcommands.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
