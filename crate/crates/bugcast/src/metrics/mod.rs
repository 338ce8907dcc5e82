//! Code metric extraction: repository snapshots at release boundaries,
//! line counting, diffing, lexical complexity, and process counts, all
//! assembled into per-release metric vectors.

pub mod complexity;
pub mod diff;
pub mod extract;
pub mod git;
pub mod language;
pub mod loc;

pub use extract::{extract_all, extract_release_metrics, ExtractOutcome};
