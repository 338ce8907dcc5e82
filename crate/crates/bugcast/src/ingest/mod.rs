//! Issue-tracker ingestion: parse bug exports, attribute each bug to a
//! release, and reconstruct the per-release bug history.
//!
//! Attribution prefers explicit affected-release labels; bugs without a
//! usable label fall back to a creation-date rule that partitions time at
//! each release freeze.

pub mod fetch;

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{day_end_utc, day_start_utc, BugHistory, BugRecord, ReleaseBugCount, Timeline};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl ExportFormat {
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            e if e.eq_ignore_ascii_case("json") => Some(ExportFormat::Json),
            e if e.eq_ignore_ascii_case("csv") => Some(ExportFormat::Csv),
            _ => None,
        }
    }
}

/// One issue as exported by the tracker, before any interpretation beyond
/// flattening nested fields to strings.
#[derive(Debug, Clone, Default)]
pub struct RawIssue {
    pub key: Option<String>,
    pub issue_type: Option<String>,
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Issue types treated as bugs, compared case-insensitively.
    pub bug_types: Vec<String>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            bug_types: vec!["Bug".into()],
        }
    }
}

#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub bugs: Vec<BugRecord>,
    pub issues_seen: usize,
    /// Issues whose type did not match; counted per type, never returned.
    pub skipped_by_type: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

impl ParseOutcome {
    pub fn non_bug_count(&self) -> usize {
        self.skipped_by_type.values().sum()
    }
}

/// Parse a tracker export. Individual malformed records produce warnings and
/// are skipped; an export that cannot be read at all is a hard error carrying
/// the failing byte offset.
pub fn parse_bug_export(data: &[u8], format: ExportFormat, opts: &ParseOptions) -> Result<ParseOutcome> {
    let raw = match format {
        ExportFormat::Json => parse_json(data)?,
        ExportFormat::Csv => parse_csv(data)?,
    };
    let mut out = ParseOutcome::default();
    for (raw, mut warnings) in raw {
        out.issues_seen += 1;
        out.warnings.append(&mut warnings);
        let ty = raw.issue_type.clone().unwrap_or_default();
        let is_bug = opts.bug_types.iter().any(|b| b.eq_ignore_ascii_case(&ty));
        if !is_bug {
            let label = if ty.is_empty() { "(untyped)".to_string() } else { ty };
            *out.skipped_by_type.entry(label).or_insert(0) += 1;
            continue;
        }
        match to_bug_record(&raw) {
            Ok(bug) => out.bugs.push(bug),
            Err(reason) => out.warnings.push(format!(
                "skipping issue {}: {reason}",
                raw.key.as_deref().unwrap_or("(no key)")
            )),
        }
    }
    Ok(out)
}

fn parse_json(data: &[u8]) -> Result<Vec<(RawIssue, Vec<String>)>> {
    let value: serde_json::Value = serde_json::from_slice(data).map_err(|e| {
        let offset = byte_offset(data, e.line(), e.column());
        Error::ExportUnreadable {
            format: "json",
            offset,
            reason: e.to_string(),
        }
    })?;
    let issues = match &value {
        serde_json::Value::Array(a) => a.as_slice(),
        serde_json::Value::Object(o) => match o.get("issues").and_then(|v| v.as_array()) {
            Some(a) => a.as_slice(),
            None => {
                return Err(Error::ExportUnreadable {
                    format: "json",
                    offset: 0,
                    reason: "top level is neither an issue array nor an object with 'issues'".into(),
                })
            }
        },
        _ => {
            return Err(Error::ExportUnreadable {
                format: "json",
                offset: 0,
                reason: "top level is not an array or object".into(),
            })
        }
    };

    let mut out = Vec::new();
    for (i, issue) in issues.iter().enumerate() {
        let obj = match issue.as_object() {
            Some(o) => o,
            None => {
                out.push((
                    RawIssue::default(),
                    vec![format!("issue #{i} is not an object")],
                ));
                continue;
            }
        };
        let mut fields = BTreeMap::new();
        if let Some(nested) = obj.get("fields").and_then(|v| v.as_object()) {
            for (k, v) in nested {
                if let Some(s) = flatten_value(v) {
                    fields.insert(k.to_ascii_lowercase(), s);
                }
            }
        }
        for (k, v) in obj {
            if k == "fields" {
                continue;
            }
            if let Some(s) = flatten_value(v) {
                fields.entry(k.to_ascii_lowercase()).or_insert(s);
            }
        }
        let key = fields.get("key").cloned();
        let issue_type = fields
            .get("issuetype")
            .or_else(|| fields.get("type"))
            .or_else(|| fields.get("issue_type"))
            .cloned();
        out.push((
            RawIssue {
                key,
                issue_type,
                fields,
            },
            Vec::new(),
        ));
    }
    Ok(out)
}

/// Collapse a JSON value to the string a human would read in the tracker UI.
fn flatten_value(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        serde_json::Value::Object(o) => o
            .get("name")
            .or_else(|| o.get("key"))
            .or_else(|| o.get("value"))
            .and_then(flatten_value)
            .or_else(|| Some(v.to_string())),
        serde_json::Value::Array(a) => {
            let parts: Vec<String> = a.iter().filter_map(flatten_value).collect();
            Some(parts.join("; "))
        }
    }
}

fn byte_offset(data: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut remaining = line - 1;
    let mut offset = 0;
    for (i, b) in data.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if *b == b'\n' {
            remaining -= 1;
            offset = i + 1;
        }
    }
    (offset + column.saturating_sub(1)).min(data.len())
}

fn parse_csv(data: &[u8]) -> Result<Vec<(RawIssue, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(data);
    let headers: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(|s| s.trim().to_ascii_lowercase()).collect(),
        Err(e) => {
            return Err(Error::ExportUnreadable {
                format: "csv",
                offset: 0,
                reason: format!("header row does not parse: {e}"),
            })
        }
    };
    if !headers.iter().any(|h| h == "key") {
        return Err(Error::ExportUnreadable {
            format: "csv",
            offset: 0,
            reason: "header row has no 'key' column".into(),
        });
    }

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        match record {
            Ok(rec) => {
                let mut fields = BTreeMap::new();
                for (h, v) in headers.iter().zip(rec.iter()) {
                    if !v.is_empty() {
                        fields.insert(h.clone(), v.to_string());
                    }
                }
                let key = fields.get("key").cloned();
                let issue_type = fields
                    .get("type")
                    .or_else(|| fields.get("issuetype"))
                    .cloned();
                out.push((
                    RawIssue {
                        key,
                        issue_type,
                        fields,
                    },
                    Vec::new(),
                ));
            }
            Err(e) => out.push((
                RawIssue::default(),
                vec![format!("csv record #{} does not parse: {e}", i + 1)],
            )),
        }
    }
    Ok(out)
}

/// Interpret a raw issue as a bug. Errors describe why the record is
/// unusable; callers downgrade them to warnings.
pub fn to_bug_record(raw: &RawIssue) -> std::result::Result<BugRecord, String> {
    let key = raw.key.clone().ok_or("no issue key")?;
    let created_text = raw
        .fields
        .get("created")
        .or_else(|| raw.fields.get("create date"))
        .or_else(|| raw.fields.get("create_date"))
        .ok_or("no creation date")?;
    let created =
        parse_tracker_datetime(created_text).ok_or_else(|| format!("unreadable creation date '{created_text}'"))?;

    let affected_text = raw
        .fields
        .get("versions")
        .or_else(|| raw.fields.get("affected_releases"))
        .or_else(|| raw.fields.get("affected versions"))
        .cloned()
        .unwrap_or_default();
    let affected_releases: Vec<String> = affected_text
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let first_affected = raw
        .fields
        .get("first_affected")
        .or_else(|| raw.fields.get("first affected release"))
        .cloned()
        .filter(|s| !s.trim().is_empty())
        .or_else(|| affected_releases.first().cloned());

    let resolved = raw
        .fields
        .get("resolutiondate")
        .or_else(|| raw.fields.get("resolved"))
        .or_else(|| raw.fields.get("resolution_date"))
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_tracker_datetime(s).ok_or_else(|| format!("unreadable resolution date '{s}'")))
        .transpose()?;

    let subproject = raw
        .fields
        .get("project")
        .or_else(|| raw.fields.get("subproject"))
        .cloned()
        .or_else(|| key.split_once('-').map(|(p, _)| p.to_string()));

    Ok(BugRecord {
        key,
        subproject,
        status: raw.fields.get("status").cloned().unwrap_or_default(),
        priority: raw.fields.get("priority").cloned(),
        affected_releases,
        first_affected,
        resolution: raw.fields.get("resolution").cloned(),
        created,
        resolved,
    })
}

/// Parse the datetime shapes trackers actually emit: RFC 3339, the compact
/// `+0000` offset style, naive `YYYY-MM-DD HH:MM:SS`, and bare dates.
pub fn parse_tracker_datetime(text: &str) -> Option<DateTime<Utc>> {
    let t = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Some(dt.with_timezone(&Utc));
    }
    if let Ok(dt) = DateTime::parse_from_str(t, "%Y-%m-%dT%H:%M:%S%.f%z") {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(t, fmt) {
            return Some(naive.and_utc());
        }
    }
    if let Ok(date) = t.parse::<NaiveDate>() {
        return Some(day_start_utc(date));
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentSource {
    Labeled,
    DateInferred,
}

impl std::fmt::Display for AssignmentSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AssignmentSource::Labeled => "labeled",
            AssignmentSource::DateInferred => "date_inferred",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub bug_key: String,
    pub release_id: u32,
    pub source: AssignmentSource,
    /// Date-inferred assignment whose creation date lies after the last
    /// freeze day. The bug still counts toward the last release.
    pub beyond_last_window: bool,
}

/// Attribute one bug to a release. Labels win over dates; among several
/// labeled releases the earliest in timeline order is chosen. Unknown label
/// names produce a warning and fall through to the date rule.
pub fn assign_release(bug: &BugRecord, timeline: &Timeline) -> (Assignment, Option<String>) {
    let mut candidates: Vec<&str> = bug.affected_releases.iter().map(|s| s.as_str()).collect();
    if let Some(fa) = &bug.first_affected {
        if !candidates.contains(&fa.as_str()) {
            candidates.push(fa);
        }
    }

    if !candidates.is_empty() {
        let earliest = candidates
            .iter()
            .filter_map(|name| timeline.position(timeline.release_by_name(name)?.id))
            .min();
        if let Some(pos) = earliest {
            return (
                Assignment {
                    bug_key: bug.key.clone(),
                    release_id: timeline.releases[pos].id,
                    source: AssignmentSource::Labeled,
                    beyond_last_window: false,
                },
                None,
            );
        }
    }

    let warning = if candidates.is_empty() {
        None
    } else {
        Some(format!(
            "bug {}: no affected release matches the timeline ({}), using creation date",
            bug.key,
            candidates.join(", ")
        ))
    };
    (assign_by_date(bug, timeline), warning)
}

fn assign_by_date(bug: &BugRecord, timeline: &Timeline) -> Assignment {
    let mut pos = 0;
    for (i, r) in timeline.releases.iter().enumerate() {
        if bug.created >= day_start_utc(r.freeze) {
            pos = i;
        } else {
            break;
        }
    }
    let last = timeline.releases.last().expect("validated timeline");
    Assignment {
        bug_key: bug.key.clone(),
        release_id: timeline.releases[pos].id,
        source: AssignmentSource::DateInferred,
        beyond_last_window: pos + 1 == timeline.releases.len()
            && bug.created > day_end_utc(last.freeze),
    }
}

/// Attribute every bug; returns assignments in input order plus warnings.
pub fn assign_all(bugs: &[BugRecord], timeline: &Timeline) -> (Vec<Assignment>, Vec<String>) {
    let mut assignments = Vec::with_capacity(bugs.len());
    let mut warnings = Vec::new();
    for bug in bugs {
        let (a, w) = assign_release(bug, timeline);
        assignments.push(a);
        warnings.extend(w);
    }
    (assignments, warnings)
}

/// Tally assignments into per-release counts. Every timeline release is
/// present, zero-count releases included.
pub fn history_from_assignments(assignments: &[Assignment], timeline: &Timeline) -> BugHistory {
    let mut counts: Vec<ReleaseBugCount> = timeline
        .releases
        .iter()
        .map(|r| ReleaseBugCount {
            release_id: r.id,
            labeled: 0,
            inferred: 0,
        })
        .collect();
    for a in assignments {
        if let Some(c) = counts.iter_mut().find(|c| c.release_id == a.release_id) {
            match a.source {
                AssignmentSource::Labeled => c.labeled += 1,
                AssignmentSource::DateInferred => c.inferred += 1,
            }
        }
    }
    BugHistory { counts }
}

/// Full reconstruction: attribute all bugs and tally them.
pub fn build_bug_history(bugs: &[BugRecord], timeline: &Timeline) -> Result<BugHistory> {
    if timeline.releases.is_empty() {
        return Err(Error::Validation("timeline has no releases".into()));
    }
    let (assignments, _) = assign_all(bugs, timeline);
    Ok(history_from_assignments(&assignments, timeline))
}
