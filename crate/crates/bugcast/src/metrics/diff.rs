//! Change metrics between two snapshots: line-level diffs over code lines,
//! per scope.
//!
//! Within each changed hunk, paired old/new lines count as modified and the
//! surplus counts as removed or new. Only code-classified lines participate,
//! so comment and blank edits are invisible here. Files are identified by
//! path; a moved file shows up as one removal plus one addition.

use std::collections::BTreeMap;
use std::ops::AddAssign;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use similar::{DiffOp, TextDiff};

use crate::error::Result;
use crate::metrics::language::{language_of, LanguageSpec};
use crate::metrics::loc::{code_lines, is_binary, sorted_source_files};
use crate::model::LanguageConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDelta {
    pub new: u64,
    pub modified: u64,
    pub removed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeChange {
    pub new_loc: u64,
    pub modified_loc: u64,
    pub removed_loc: u64,
    pub new_files: u64,
    pub modified_files: u64,
}

impl AddAssign<&ScopeChange> for ScopeChange {
    fn add_assign(&mut self, other: &ScopeChange) {
        self.new_loc += other.new_loc;
        self.modified_loc += other.modified_loc;
        self.removed_loc += other.removed_loc;
        self.new_files += other.new_files;
        self.modified_files += other.modified_files;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeMetrics {
    pub all: ScopeChange,
    pub filtered: ScopeChange,
    /// Pairs skipped because at least one side is binary.
    pub binary_skipped: u64,
}

/// Diff two sequences of code lines. Consecutive non-equal diff operations
/// form a hunk; `min(deleted, inserted)` lines of each hunk pair up as
/// modified, the rest are new or removed.
pub fn diff_code_lines(old: &[&str], new: &[&str]) -> LineDelta {
    let diff = TextDiff::from_slices(old, new);
    let mut delta = LineDelta::default();
    let mut dels = 0u64;
    let mut ins = 0u64;
    let flush = |dels: &mut u64, ins: &mut u64, delta: &mut LineDelta| {
        let paired = (*dels).min(*ins);
        delta.modified += paired;
        delta.removed += *dels - paired;
        delta.new += *ins - paired;
        *dels = 0;
        *ins = 0;
    };
    for op in diff.ops() {
        match op {
            DiffOp::Equal { .. } => flush(&mut dels, &mut ins, &mut delta),
            DiffOp::Delete { old_len, .. } => dels += *old_len as u64,
            DiffOp::Insert { new_len, .. } => ins += *new_len as u64,
            DiffOp::Replace {
                old_len, new_len, ..
            } => {
                dels += *old_len as u64;
                ins += *new_len as u64;
            }
        }
    }
    flush(&mut dels, &mut ins, &mut delta);
    delta
}

fn tree_files(root: &Path, languages: &LanguageConfig) -> Result<BTreeMap<PathBuf, &'static LanguageSpec>> {
    let mut files = BTreeMap::new();
    for path in sorted_source_files(root) {
        let path = path?;
        let lang = language_of(&path);
        if languages.is_excluded(lang.name) {
            continue;
        }
        let rel = path
            .strip_prefix(root)
            .expect("walked path is under root")
            .to_path_buf();
        files.insert(rel, lang);
    }
    Ok(files)
}

/// Compute change metrics between an old and a new snapshot directory.
pub fn diff_metrics(
    old_root: &Path,
    new_root: &Path,
    languages: &LanguageConfig,
) -> Result<ChangeMetrics> {
    let old_files = tree_files(old_root, languages)?;
    let new_files = tree_files(new_root, languages)?;
    let mut out = ChangeMetrics::default();

    let mut paths: Vec<&PathBuf> = old_files.keys().chain(new_files.keys()).collect();
    paths.sort();
    paths.dedup();

    for rel in paths {
        let in_old = old_files.contains_key(rel);
        let in_new = new_files.contains_key(rel);
        let lang = *new_files.get(rel).or_else(|| old_files.get(rel)).unwrap();
        let filtered = languages.is_filtered(lang.name);

        let mut apply = |f: &dyn Fn(&mut ScopeChange)| {
            f(&mut out.all);
            if filtered {
                f(&mut out.filtered);
            }
        };

        match (in_old, in_new) {
            (false, true) => {
                let bytes = std::fs::read(new_root.join(rel))?;
                if is_binary(&bytes) {
                    out.binary_skipped += 1;
                    continue;
                }
                let text = String::from_utf8_lossy(&bytes);
                let loc = code_lines(&text, lang).len() as u64;
                apply(&|s: &mut ScopeChange| {
                    s.new_files += 1;
                    s.new_loc += loc;
                });
            }
            (true, false) => {
                let bytes = std::fs::read(old_root.join(rel))?;
                if is_binary(&bytes) {
                    out.binary_skipped += 1;
                    continue;
                }
                let text = String::from_utf8_lossy(&bytes);
                let loc = code_lines(&text, lang).len() as u64;
                apply(&|s: &mut ScopeChange| s.removed_loc += loc);
            }
            (true, true) => {
                let old_bytes = std::fs::read(old_root.join(rel))?;
                let new_bytes = std::fs::read(new_root.join(rel))?;
                if is_binary(&old_bytes) || is_binary(&new_bytes) {
                    if old_bytes != new_bytes {
                        out.binary_skipped += 1;
                    }
                    continue;
                }
                if old_bytes == new_bytes {
                    continue;
                }
                let old_text = String::from_utf8_lossy(&old_bytes);
                let new_text = String::from_utf8_lossy(&new_bytes);
                let old_lines = code_lines(&old_text, lang);
                let new_lines = code_lines(&new_text, lang);
                if old_lines == new_lines {
                    // Comment or whitespace churn only.
                    continue;
                }
                let delta = diff_code_lines(&old_lines, &new_lines);
                apply(&|s: &mut ScopeChange| {
                    s.modified_files += 1;
                    s.new_loc += delta.new;
                    s.modified_loc += delta.modified;
                    s.removed_loc += delta.removed;
                });
            }
            (false, false) => unreachable!("path came from one of the maps"),
        }
    }
    Ok(out)
}
