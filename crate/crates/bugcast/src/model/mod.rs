//! Core domain types: release timelines, bug records, metric catalog.

pub mod descriptor;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One release in a project timeline. `start`..`freeze` is the development
/// window; `release_date` is when the release was shipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseSpec {
    pub id: u32,
    pub name: String,
    pub start: NaiveDate,
    pub freeze: NaiveDate,
    pub release_date: NaiveDate,
    #[serde(default)]
    pub lts: bool,
}

/// Language scoping configuration for metric extraction. `filter` names the
/// dominant implementation language(s) used for the narrowed metric scope;
/// `excluded` languages are dropped from all scopes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageConfig {
    #[serde(default)]
    pub filter: Vec<String>,
    #[serde(default)]
    pub excluded: Vec<String>,
}

impl LanguageConfig {
    pub fn is_filtered(&self, language: &str) -> bool {
        self.filter.iter().any(|f| f.eq_ignore_ascii_case(language))
    }

    pub fn is_excluded(&self, language: &str) -> bool {
        self.excluded
            .iter()
            .any(|e| e.eq_ignore_ascii_case(language))
    }
}

/// Ordered set of releases for one project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub project: String,
    pub releases: Vec<ReleaseSpec>,
    #[serde(default)]
    pub languages: LanguageConfig,
}

impl Timeline {
    pub fn release(&self, id: u32) -> Option<&ReleaseSpec> {
        self.releases.iter().find(|r| r.id == id)
    }

    pub fn release_by_name(&self, name: &str) -> Option<&ReleaseSpec> {
        self.releases.iter().find(|r| r.name == name)
    }

    pub fn first(&self) -> Option<&ReleaseSpec> {
        self.releases.first()
    }

    pub fn last(&self) -> Option<&ReleaseSpec> {
        self.releases.last()
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }

    /// Position of a release id in timeline order.
    pub fn position(&self, id: u32) -> Option<usize> {
        self.releases.iter().position(|r| r.id == id)
    }
}

/// A single violated timeline constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Name of the offending release, if the constraint is release-local.
    pub release: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.release {
            Some(r) => write!(f, "release '{}': {}", r, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Check all structural constraints on a timeline. Returns every violation
/// found, empty when the timeline is well formed.
pub fn validate_timeline(timeline: &Timeline) -> Vec<Violation> {
    let mut out = Vec::new();
    if timeline.project.trim().is_empty() {
        out.push(Violation {
            release: None,
            message: "project name is empty".into(),
        });
    }
    if timeline.releases.is_empty() {
        out.push(Violation {
            release: None,
            message: "timeline has no releases".into(),
        });
        return out;
    }

    let mut names = BTreeSet::new();
    for r in &timeline.releases {
        if r.name.trim().is_empty() {
            out.push(Violation {
                release: Some(format!("#{}", r.id)),
                message: "release name is empty".into(),
            });
        } else if !names.insert(r.name.clone()) {
            out.push(Violation {
                release: Some(r.name.clone()),
                message: "duplicate release name".into(),
            });
        }
        if r.start > r.freeze {
            out.push(Violation {
                release: Some(r.name.clone()),
                message: format!("start {} is after freeze {}", r.start, r.freeze),
            });
        }
        if r.freeze > r.release_date {
            out.push(Violation {
                release: Some(r.name.clone()),
                message: format!("freeze {} is after release date {}", r.freeze, r.release_date),
            });
        }
    }

    for pair in timeline.releases.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.id <= a.id {
            out.push(Violation {
                release: Some(b.name.clone()),
                message: format!("id {} does not increase over predecessor id {}", b.id, a.id),
            });
        }
        if b.freeze <= a.freeze {
            out.push(Violation {
                release: Some(b.name.clone()),
                message: format!(
                    "freeze {} is not after predecessor freeze {}",
                    b.freeze, a.freeze
                ),
            });
        }
    }
    out
}

/// Start of the given day as a UTC instant.
pub fn day_start_utc(date: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&date.and_time(NaiveTime::MIN))
}

/// Last second of the given day as a UTC instant. Used wherever a date acts
/// as an inclusive upper bound.
pub fn day_end_utc(date: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&date.and_hms_opt(23, 59, 59).expect("valid time"))
}

/// One issue-tracker bug.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugRecord {
    pub key: String,
    pub subproject: Option<String>,
    pub status: String,
    pub priority: Option<String>,
    /// Release names the tracker marks as affected, in tracker order.
    pub affected_releases: Vec<String>,
    /// Earliest affected release, when the tracker provides one.
    pub first_affected: Option<String>,
    pub resolution: Option<String>,
    pub created: DateTime<Utc>,
    pub resolved: Option<DateTime<Utc>>,
}

impl BugRecord {
    /// Hours from creation to resolution, when resolved.
    pub fn time_to_solve_hours(&self) -> Option<f64> {
        self.resolved
            .map(|r| (r - self.created).num_seconds() as f64 / 3600.0)
    }
}

/// Per-release bug tallies split by how each bug was attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseBugCount {
    pub release_id: u32,
    /// Bugs attributed through an explicit affected-release label.
    pub labeled: u64,
    /// Bugs attributed by creation date alone.
    pub inferred: u64,
}

impl ReleaseBugCount {
    pub fn total(&self) -> u64 {
        self.labeled + self.inferred
    }
}

/// Reconstructed bug counts for every release of a timeline, ordered by
/// release id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugHistory {
    pub counts: Vec<ReleaseBugCount>,
}

impl BugHistory {
    pub fn get(&self, release_id: u32) -> Option<&ReleaseBugCount> {
        self.counts.iter().find(|c| c.release_id == release_id)
    }

    pub fn total_bugs(&self) -> u64 {
        self.counts.iter().map(|c| c.total()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricCategory {
    Size,
    Change,
    Complexity,
    Process,
}

impl fmt::Display for MetricCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MetricCategory::Size => "size",
            MetricCategory::Change => "change",
            MetricCategory::Complexity => "complexity",
            MetricCategory::Process => "process",
        };
        f.write_str(s)
    }
}

/// Which part of the tree a metric is measured over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScope {
    /// Every non-excluded language.
    All,
    /// Only the configured filter language(s).
    Filtered,
}

impl fmt::Display for MetricScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricScope::All => "all",
            MetricScope::Filtered => "filtered",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricDef {
    pub id: String,
    pub category: MetricCategory,
    pub scope: MetricScope,
    pub description: String,
}

/// The fixed set of metrics one extraction run produces per release.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricCatalog {
    entries: Vec<MetricDef>,
}

/// Cyclomatic complexity thresholds used for the exceedance counts, in
/// ascending order.
pub const CC_THRESHOLDS: [u32; 3] = [10, 15, 20];

impl MetricCatalog {
    /// The standard 43-metric catalog: size and change metrics in both
    /// scopes, complexity metrics in both scopes, process metrics, and a few
    /// aggregate sums that proved useful as regression inputs.
    pub fn standard() -> Self {
        use MetricCategory::*;
        use MetricScope::*;

        let mut entries = Vec::new();
        let mut push = |id: &str, category, scope, description: &str| {
            entries.push(MetricDef {
                id: id.into(),
                category,
                scope,
                description: description.into(),
            });
        };

        for (scope, suffix, tag) in [(All, "", "all languages"), (Filtered, "_filtered", "filter languages")] {
            push(
                &format!("loc{suffix}"),
                Size,
                scope,
                &format!("lines of code at freeze, {tag}"),
            );
            push(
                &format!("new_loc{suffix}"),
                Change,
                scope,
                &format!("lines added during the window, {tag}"),
            );
            push(
                &format!("modified_loc{suffix}"),
                Change,
                scope,
                &format!("lines changed in place during the window, {tag}"),
            );
            push(
                &format!("removed_loc{suffix}"),
                Change,
                scope,
                &format!("lines removed during the window, {tag}"),
            );
            push(
                &format!("new_modified_loc{suffix}"),
                Change,
                scope,
                &format!("lines added or changed during the window, {tag}"),
            );
            push(
                &format!("files{suffix}"),
                Size,
                scope,
                &format!("source files at freeze, {tag}"),
            );
            push(
                &format!("new_files{suffix}"),
                Change,
                scope,
                &format!("files added during the window, {tag}"),
            );
            push(
                &format!("modified_files{suffix}"),
                Change,
                scope,
                &format!("existing files changed during the window, {tag}"),
            );
        }

        for (scope, suffix, tag) in [(All, "", "all languages"), (Filtered, "_filtered", "filter languages")] {
            push(
                &format!("functions{suffix}"),
                Complexity,
                scope,
                &format!("functions at freeze, {tag}"),
            );
            push(
                &format!("new_modified_functions{suffix}"),
                Complexity,
                scope,
                &format!("functions added or changed during the window, {tag}"),
            );
            push(
                &format!("total_cc{suffix}"),
                Complexity,
                scope,
                &format!("summed cyclomatic complexity at freeze, {tag}"),
            );
            for t in CC_THRESHOLDS {
                push(
                    &format!("functions_cc_over_{t}{suffix}"),
                    Complexity,
                    scope,
                    &format!("functions with complexity over {t} at freeze, {tag}"),
                );
            }
            for t in CC_THRESHOLDS {
                push(
                    &format!("new_modified_functions_cc_over_{t}{suffix}"),
                    Complexity,
                    scope,
                    &format!("added or changed functions with complexity over {t}, {tag}"),
                );
            }
        }

        push("commits", Process, All, "commits on the main line during the window");
        push(
            "contributors",
            Process,
            All,
            "distinct commit authors during the window",
        );

        push(
            "new_modified_removed_loc",
            Change,
            All,
            "total line churn during the window, all languages",
        );
        push(
            "new_modified_removed_loc_filtered",
            Change,
            Filtered,
            "total line churn during the window, filter languages",
        );
        push(
            "new_removed_loc",
            Change,
            All,
            "lines added plus removed during the window, all languages",
        );
        push(
            "new_removed_loc_filtered",
            Change,
            Filtered,
            "lines added plus removed during the window, filter languages",
        );
        push(
            "new_modified_files",
            Change,
            All,
            "files added or changed during the window, all languages",
        );
        push(
            "new_modified_files_filtered",
            Change,
            Filtered,
            "files added or changed during the window, filter languages",
        );
        push(
            "cc_exceedances_filtered",
            Complexity,
            Filtered,
            "summed threshold exceedance counts at freeze, filter languages",
        );

        MetricCatalog { entries }
    }

    pub fn entries(&self) -> &[MetricDef] {
        &self.entries
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }

    /// Fingerprint of the catalog composition. Extraction caches embed this
    /// so stale entries never survive a catalog change.
    pub fn version(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for e in &self.entries {
            hasher.update(e.id.as_bytes());
            hasher.update([0u8]);
        }
        let digest = hasher.finalize();
        format!("catalog-{}", &hex::encode(digest)[..12])
    }
}

/// Values for every catalog metric at one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub release_id: u32,
    pub values: BTreeMap<String, f64>,
}

impl MetricVector {
    pub fn new(release_id: u32) -> Self {
        MetricVector {
            release_id,
            values: BTreeMap::new(),
        }
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn set(&mut self, id: &str, value: f64) {
        self.values.insert(id.to_string(), value);
    }

    /// Error unless the key set matches the catalog exactly.
    pub fn conforms_to(&self, catalog: &MetricCatalog) -> Result<()> {
        for def in catalog.entries() {
            if !self.values.contains_key(&def.id) {
                return Err(Error::MissingMetric(def.id.clone()));
            }
        }
        if self.values.len() != catalog.len() {
            let extra: Vec<&str> = self
                .values
                .keys()
                .filter(|k| !catalog.contains(k))
                .map(|k| k.as_str())
                .collect();
            return Err(Error::Validation(format!(
                "metric vector for release {} has keys outside the catalog: {}",
                self.release_id,
                extra.join(", ")
            )));
        }
        Ok(())
    }
}
