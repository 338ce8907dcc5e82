//! Per-release metric extraction: resolve snapshots, materialize them,
//! run the counters, and assemble the full catalog vector.
//!
//! Results are cached on disk keyed by the snapshot pair, the window dates,
//! the language configuration, and the catalog version, so unchanged history
//! is never re-scanned. A corrupted cache entry is recomputed and rewritten,
//! never trusted.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::complexity::{changed_function_metrics, complexity_metrics, FunctionRecord};
use crate::metrics::diff::diff_metrics;
use crate::metrics::git::{RepoHandle, SnapshotPair};
use crate::metrics::loc::count_tree;
use crate::model::{MetricCatalog, MetricVector, ReleaseSpec, Timeline, CC_THRESHOLDS};

#[derive(Debug)]
pub struct ExtractOutcome {
    pub vector: MetricVector,
    pub snapshot: SnapshotPair,
    pub cache_hit: bool,
    pub warnings: Vec<String>,
}

fn cache_key(
    snapshot: &SnapshotPair,
    release: &ReleaseSpec,
    timeline: &Timeline,
    catalog: &MetricCatalog,
) -> String {
    let mut h = Sha256::new();
    for part in [
        snapshot.old_commit.as_str(),
        snapshot.new_commit.as_str(),
        &release.id.to_string(),
        &release.start.to_string(),
        &release.freeze.to_string(),
        &catalog.version(),
        &timeline.languages.filter.join(","),
        &timeline.languages.excluded.join(","),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())[..32].to_string()
}

fn cache_path(cache_dir: &Path, key: &str) -> PathBuf {
    cache_dir.join(format!("{key}.json"))
}

fn read_cache(path: &Path, release_id: u32, catalog: &MetricCatalog) -> Option<MetricVector> {
    let bytes = std::fs::read(path).ok()?;
    let vector: MetricVector = serde_json::from_slice(&bytes).ok()?;
    if vector.release_id != release_id || vector.conforms_to(catalog).is_err() {
        return None;
    }
    Some(vector)
}

fn write_cache(path: &Path, vector: &MetricVector) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, serde_json::to_vec_pretty(vector).expect("vector serializes"))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Extract the full metric vector for one release.
pub fn extract_release_metrics(
    repo: &RepoHandle,
    timeline: &Timeline,
    release_id: u32,
    catalog: &MetricCatalog,
    cache_dir: Option<&Path>,
) -> Result<ExtractOutcome> {
    let release = timeline
        .release(release_id)
        .ok_or_else(|| Error::Validation(format!("release id {release_id} is not in the timeline")))?;
    let mut warnings = Vec::new();

    let (snapshot, warn) = repo.resolve_snapshots(release)?;
    warnings.extend(warn);

    let key = cache_key(&snapshot, release, timeline, catalog);
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, &key);
        if path.exists() {
            match read_cache(&path, release_id, catalog) {
                Some(vector) => {
                    return Ok(ExtractOutcome {
                        vector,
                        snapshot,
                        cache_hit: true,
                        warnings,
                    })
                }
                None => warnings.push(format!(
                    "cache entry {} was unreadable; recomputing",
                    path.display()
                )),
            }
        }
    }

    let vector = compute_vector(repo, timeline, release, &snapshot, catalog, &mut warnings)?;
    if let Some(dir) = cache_dir {
        write_cache(&cache_path(dir, &key), &vector)?;
    }
    Ok(ExtractOutcome {
        vector,
        snapshot,
        cache_hit: false,
        warnings,
    })
}

fn compute_vector(
    repo: &RepoHandle,
    timeline: &Timeline,
    release: &ReleaseSpec,
    snapshot: &SnapshotPair,
    catalog: &MetricCatalog,
    warnings: &mut Vec<String>,
) -> Result<MetricVector> {
    let languages = &timeline.languages;
    let old_tree = repo.materialize(&snapshot.old_commit)?;
    let new_tree = repo.materialize(&snapshot.new_commit)?;

    let sizes = count_tree(new_tree.root(), languages)?;
    let change = diff_metrics(old_tree.root(), new_tree.root(), languages)?;
    if change.binary_skipped > 0 {
        warnings.push(format!(
            "{} binary file pairs skipped while diffing release '{}'",
            change.binary_skipped, release.name
        ));
    }

    let old_cx = complexity_metrics(old_tree.root(), languages)?;
    let new_cx = complexity_metrics(new_tree.root(), languages)?;
    for (file, reason) in new_cx.skipped.iter().chain(old_cx.skipped.iter()) {
        warnings.push(format!(
            "complexity scan skipped {file} for release '{}': {reason}",
            release.name
        ));
    }

    let filtered_records = |records: &[FunctionRecord]| -> Vec<FunctionRecord> {
        records
            .iter()
            .filter(|r| languages.is_filtered(&r.language))
            .cloned()
            .collect()
    };
    let changed_all = changed_function_metrics(&old_cx.records, &new_cx.records);
    let changed_filtered = changed_function_metrics(
        &filtered_records(&old_cx.records),
        &filtered_records(&new_cx.records),
    );

    let process = repo.count_commits(release)?;

    let mut v = MetricVector::new(release.id);
    for (suffix, tally, scope) in [
        ("", &sizes.all, &change.all),
        ("_filtered", &sizes.filtered, &change.filtered),
    ] {
        v.set(&format!("loc{suffix}"), tally.lines.code as f64);
        v.set(&format!("files{suffix}"), tally.files as f64);
        v.set(&format!("new_loc{suffix}"), scope.new_loc as f64);
        v.set(&format!("modified_loc{suffix}"), scope.modified_loc as f64);
        v.set(&format!("removed_loc{suffix}"), scope.removed_loc as f64);
        v.set(
            &format!("new_modified_loc{suffix}"),
            (scope.new_loc + scope.modified_loc) as f64,
        );
        v.set(&format!("new_files{suffix}"), scope.new_files as f64);
        v.set(&format!("modified_files{suffix}"), scope.modified_files as f64);
    }

    for (suffix, summary, changed) in [
        ("", new_cx.summary_all(), &changed_all),
        ("_filtered", new_cx.summary_filtered(languages), &changed_filtered),
    ] {
        v.set(&format!("functions{suffix}"), summary.functions as f64);
        v.set(&format!("total_cc{suffix}"), summary.total_cc as f64);
        v.set(
            &format!("new_modified_functions{suffix}"),
            changed.count as f64,
        );
        for (i, t) in CC_THRESHOLDS.iter().enumerate() {
            v.set(
                &format!("functions_cc_over_{t}{suffix}"),
                summary.over[i] as f64,
            );
            v.set(
                &format!("new_modified_functions_cc_over_{t}{suffix}"),
                changed.over[i] as f64,
            );
        }
    }

    v.set("commits", process.commits as f64);
    v.set("contributors", process.contributors as f64);

    for suffix in ["", "_filtered"] {
        let [nl, ml, rl, nf, mf] =
            ["new_loc", "modified_loc", "removed_loc", "new_files", "modified_files"]
                .map(|id| v.get(&format!("{id}{suffix}")).expect("set above"));
        v.set(&format!("new_modified_removed_loc{suffix}"), nl + ml + rl);
        v.set(&format!("new_removed_loc{suffix}"), nl + rl);
        v.set(&format!("new_modified_files{suffix}"), nf + mf);
    }
    let ccx: f64 = CC_THRESHOLDS
        .iter()
        .map(|t| v.get(&format!("functions_cc_over_{t}_filtered")).expect("set above"))
        .sum();
    v.set("cc_exceedances_filtered", ccx);

    v.conforms_to(catalog)?;
    Ok(v)
}

/// Extract every release of the timeline, collecting per-release failures
/// instead of stopping at the first one.
pub fn extract_all(
    repo: &RepoHandle,
    timeline: &Timeline,
    catalog: &MetricCatalog,
    cache_dir: Option<&Path>,
) -> (Vec<ExtractOutcome>, Vec<(u32, Error)>) {
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for r in &timeline.releases {
        match extract_release_metrics(repo, timeline, r.id, catalog, cache_dir) {
            Ok(o) => outcomes.push(o),
            Err(e) => failures.push((r.id, e)),
        }
    }
    (outcomes, failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::git::RepoBuilder;
    use crate::model::{LanguageConfig, ReleaseSpec};
    use chrono::{DateTime, NaiveDate, Utc};

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn at(s: &str) -> DateTime<Utc> {
        format!("{s}T12:00:00Z").parse().unwrap()
    }

    const MAIN_V1: &str = "public class Main {\n    public static int add(int a, int b) {\n        return a + b;\n    }\n}\n";
    const MAIN_V2: &str = "public class Main {\n    public static int add(int a, int b) {\n        return a + b + 1;\n    }\n}\n";
    const UTIL: &str = "public class Util {\n    // helper\n    public static int pick(int x) {\n        if (x > 2 && x < 10) {\n            return x;\n        }\n        return 0;\n    }\n}\n";
    const NATIVE: &str = "int triple(int x) {\n    return x * 3;\n}\n";

    fn fixture() -> (tempfile::TempDir, RepoHandle, Timeline) {
        let dir = tempfile::tempdir().unwrap();
        let b = RepoBuilder::init(dir.path()).unwrap();
        b.write("src/Main.java", MAIN_V1).unwrap();
        b.commit("seed", at("2019-12-01"), "Ada", "ada@x").unwrap();
        b.write("src/Main.java", MAIN_V2).unwrap();
        b.write("src/Util.java", UTIL).unwrap();
        b.write("native.c", NATIVE).unwrap();
        b.write("cfg.yaml", "a: 1\nb: 2\n").unwrap();
        b.commit("feature", at("2020-02-01"), "Ada", "ada@x").unwrap();
        b.write("src/Late.java", "public class Late {\n}\n").unwrap();
        b.commit("late", at("2020-08-01"), "Brin", "brin@x").unwrap();

        let timeline = Timeline {
            project: "fixture".into(),
            releases: vec![
                ReleaseSpec {
                    id: 1,
                    name: "r1".into(),
                    start: d("2020-01-01"),
                    freeze: d("2020-06-30"),
                    release_date: d("2020-07-15"),
                    lts: false,
                },
                ReleaseSpec {
                    id: 2,
                    name: "r2".into(),
                    start: d("2020-09-01"),
                    freeze: d("2020-09-30"),
                    release_date: d("2020-10-15"),
                    lts: false,
                },
            ],
            languages: LanguageConfig {
                filter: vec!["java".into()],
                excluded: vec!["yaml".into()],
            },
        };
        let handle = RepoHandle::open(dir.path()).unwrap();
        (dir, handle, timeline)
    }

    #[test]
    fn full_vector_matches_hand_counts() {
        let (_dir, repo, timeline) = fixture();
        let catalog = MetricCatalog::standard();
        let out = extract_release_metrics(&repo, &timeline, 1, &catalog, None).unwrap();
        assert!(!out.cache_hit);
        let v = &out.vector;
        v.conforms_to(&catalog).unwrap();

        let expect = [
            ("loc", 16.0),
            ("files", 3.0),
            ("loc_filtered", 13.0),
            ("files_filtered", 2.0),
            ("new_loc", 11.0),
            ("modified_loc", 1.0),
            ("removed_loc", 0.0),
            ("new_modified_loc", 12.0),
            ("new_files", 2.0),
            ("modified_files", 1.0),
            ("new_loc_filtered", 8.0),
            ("modified_loc_filtered", 1.0),
            ("new_files_filtered", 1.0),
            ("modified_files_filtered", 1.0),
            ("functions", 3.0),
            ("total_cc", 5.0),
            ("functions_filtered", 2.0),
            ("total_cc_filtered", 4.0),
            ("new_modified_functions", 3.0),
            ("new_modified_functions_filtered", 2.0),
            ("functions_cc_over_10", 0.0),
            ("commits", 1.0),
            ("contributors", 1.0),
            ("new_modified_removed_loc", 12.0),
            ("new_modified_removed_loc_filtered", 9.0),
            ("new_removed_loc", 11.0),
            ("new_modified_files", 3.0),
            ("new_modified_files_filtered", 2.0),
            ("cc_exceedances_filtered", 0.0),
        ];
        for (id, want) in expect {
            assert_eq!(v.get(id), Some(want), "metric {id}");
        }
    }

    #[test]
    fn empty_window_yields_zero_change() {
        let (_dir, repo, timeline) = fixture();
        let catalog = MetricCatalog::standard();
        let out = extract_release_metrics(&repo, &timeline, 2, &catalog, None).unwrap();
        let v = &out.vector;
        assert_eq!(out.snapshot.old_commit, out.snapshot.new_commit);
        for id in [
            "new_loc",
            "modified_loc",
            "removed_loc",
            "new_files",
            "modified_files",
            "new_modified_functions",
            "commits",
            "contributors",
            "new_modified_removed_loc",
        ] {
            assert_eq!(v.get(id), Some(0.0), "metric {id}");
        }
        // Size at freeze still sees the whole tree, Late.java included.
        assert_eq!(v.get("loc"), Some(18.0));
        assert_eq!(v.get("files"), Some(4.0));
    }

    #[test]
    fn cache_round_trip_and_corruption_recovery() {
        let (_dir, repo, timeline) = fixture();
        let catalog = MetricCatalog::standard();
        let cache = tempfile::tempdir().unwrap();

        let first =
            extract_release_metrics(&repo, &timeline, 1, &catalog, Some(cache.path())).unwrap();
        assert!(!first.cache_hit);
        let second =
            extract_release_metrics(&repo, &timeline, 1, &catalog, Some(cache.path())).unwrap();
        assert!(second.cache_hit);
        assert_eq!(first.vector, second.vector);

        let entries: Vec<_> = std::fs::read_dir(cache.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        assert_eq!(entries.len(), 1);
        std::fs::write(&entries[0], b"{ not json").unwrap();
        let third =
            extract_release_metrics(&repo, &timeline, 1, &catalog, Some(cache.path())).unwrap();
        assert!(!third.cache_hit);
        assert_eq!(first.vector, third.vector);
        assert!(third.warnings.iter().any(|w| w.contains("unreadable")));

        let fourth =
            extract_release_metrics(&repo, &timeline, 1, &catalog, Some(cache.path())).unwrap();
        assert!(fourth.cache_hit, "rewritten entry should serve again");
    }

    #[test]
    fn unknown_release_is_a_validation_error() {
        let (_dir, repo, timeline) = fixture();
        let catalog = MetricCatalog::standard();
        let err = extract_release_metrics(&repo, &timeline, 99, &catalog, None).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn extract_all_collects_failures_without_stopping() {
        let (_dir, repo, mut timeline) = fixture();
        timeline.releases.insert(
            0,
            ReleaseSpec {
                id: 0,
                name: "prehistoric".into(),
                start: d("2018-01-01"),
                freeze: d("2018-06-30"),
                release_date: d("2018-07-15"),
                lts: false,
            },
        );
        let catalog = MetricCatalog::standard();
        let (outcomes, failures) = extract_all(&repo, &timeline, &catalog, None);
        assert_eq!(outcomes.len(), 2);
        assert_eq!(failures.len(), 1);
        assert_eq!(failures[0].0, 0);
    }
}
