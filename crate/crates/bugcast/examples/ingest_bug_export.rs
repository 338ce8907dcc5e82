//! Parse a tracker export, assign each bug to the release it was found in,
//! and print the per-release history. Bugs naming an affected release are
//! taken at their word; unlabeled ones fall back to creation-date windows.
//!
//!     cargo run --example ingest_bug_export

use bugcast::ingest::{assign_all, build_bug_history, parse_bug_export, ExportFormat, ParseOptions};
use bugcast::model::{LanguageConfig, ReleaseSpec, Timeline};
use chrono::NaiveDate;

const EXPORT: &str = r#"{
  "issues": [
    {"key": "DEMO-1", "fields": {"issuetype": {"name": "Bug"},
      "created": "2023-03-04T10:00:00.000+0000",
      "versions": [{"name": "helium"}]}},
    {"key": "DEMO-2", "fields": {"issuetype": {"name": "Bug"},
      "created": "2023-12-01T09:30:00.000+0000"}},
    {"key": "DEMO-3", "fields": {"issuetype": {"name": "Task"},
      "created": "2023-12-02T08:00:00.000+0000"}},
    {"key": "DEMO-4", "fields": {"issuetype": {"name": "Bug"},
      "created": "2024-02-11T23:59:00.000+0000",
      "versions": [{"name": "neon"}, {"name": "argon"}]}},
    {"key": "DEMO-5", "fields": {"issuetype": {"name": "Bug"},
      "created": "2022-06-01T00:00:00.000+0000"}}
  ]
}"#;

fn release(id: u32, name: &str, y: i32, freeze: (u32, u32)) -> ReleaseSpec {
    let start = NaiveDate::from_ymd_opt(y, 1, 9).unwrap();
    let freeze = NaiveDate::from_ymd_opt(y, freeze.0, freeze.1).unwrap();
    ReleaseSpec {
        id,
        name: name.into(),
        start,
        freeze,
        release_date: freeze + chrono::Duration::days(30),
        lts: false,
    }
}

fn main() -> anyhow::Result<()> {
    let timeline = Timeline {
        project: "demo".into(),
        releases: vec![
            release(1, "helium", 2023, (5, 22)),
            release(2, "neon", 2023, (11, 20)),
            release(3, "argon", 2024, (5, 20)),
        ],
        languages: LanguageConfig::default(),
    };

    let outcome = parse_bug_export(EXPORT.as_bytes(), ExportFormat::Json, &ParseOptions::default())?;
    println!(
        "{} issues seen, {} bugs kept, {} skipped by type",
        outcome.issues_seen,
        outcome.bugs.len(),
        outcome.non_bug_count()
    );
    for w in &outcome.warnings {
        println!("warning: {w}");
    }

    let (assignments, warnings) = assign_all(&outcome.bugs, &timeline);
    println!("\nassignments:");
    for a in &assignments {
        println!(
            "  {:<8} -> release {} ({}){}",
            a.bug_key,
            a.release_id,
            a.source,
            if a.beyond_last_window { "  [after the last freeze window]" } else { "" }
        );
    }
    for w in &warnings {
        println!("warning: {w}");
    }

    let history = build_bug_history(&outcome.bugs, &timeline)?;
    println!("\nper-release history:");
    for c in &history.counts {
        println!(
            "  release {}: total {:>2}  labeled {:>2}  date-inferred {:>2}",
            c.release_id,
            c.total(),
            c.labeled,
            c.inferred
        );
    }
    Ok(())
}
