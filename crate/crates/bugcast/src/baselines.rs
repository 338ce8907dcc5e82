//! Archived measurement snapshots of two long-running open networking
//! projects (ONAP and ONOS), six sampled releases each: per-release bug
//! counts plus six headline metrics. Useful as reference fixtures, demo
//! input, and regression anchors for the statistics code.
//!
//! Release dates are reconstructed from each project's public cadence
//! (ONAP's first release shipped 2017-11-16 with roughly six months between
//! releases; ONOS started 2014-12-05 on a roughly four-month rhythm), so the
//! timelines carry approximate windows suitable for ordering and pooling,
//! not day-accurate archaeology.

use chrono::NaiveDate;

use crate::model::{
    BugHistory, LanguageConfig, MetricVector, ReleaseBugCount, ReleaseSpec, Timeline,
};

/// One archived project: six sampled releases with bug counts and metrics.
pub struct ProjectSnapshot {
    pub name: &'static str,
    pub release_ids: [u32; 6],
    pub bugs: [f64; 6],
    pub commits: [f64; 6],
    /// Project size at freeze, thousands of lines.
    pub kloc: [f64; 6],
    pub new_kloc: [f64; 6],
    pub removed_kloc: [f64; 6],
    /// Added thousands of lines in the dominant language (Java for both).
    pub new_kloc_java: [f64; 6],
    pub new_complex_java_functions: [f64; 6],
    /// Date of the project's first release.
    first_release: (i32, u32, u32),
    /// Days between consecutive releases, approximating the cadence.
    cycle_days: i64,
    /// Days from freeze to release.
    freeze_lead_days: i64,
}

/// Metric ids used by [`ProjectSnapshot::metric_vectors`], strongest
/// correlates first by reputation, not by measurement.
pub const SNAPSHOT_METRIC_IDS: [&str; 6] = [
    "commits",
    "kloc",
    "new_kloc",
    "removed_kloc",
    "new_kloc_java",
    "new_complex_java_functions",
];

pub static ONAP: ProjectSnapshot = ProjectSnapshot {
    name: "onap",
    release_ids: [1, 3, 5, 7, 9, 10],
    bugs: [1681.0, 1862.0, 920.0, 887.0, 484.0, 282.0],
    commits: [7474.0, 10504.0, 7138.0, 4186.0, 2675.0, 2364.0],
    kloc: [8833.0, 7961.0, 9602.0, 10347.0, 9624.0, 8850.0],
    new_kloc: [5599.0, 2590.0, 1142.0, 1192.0, 374.0, 395.0],
    removed_kloc: [2027.0, 2399.0, 579.0, 397.0, 165.0, 383.0],
    new_kloc_java: [1087.0, 545.0, 142.0, 190.0, 107.0, 48.0],
    new_complex_java_functions: [897.0, 179.0, 52.0, 32.0, 30.0, 3.0],
    first_release: (2017, 11, 16),
    cycle_days: 182,
    freeze_lead_days: 30,
};

pub static ONOS: ProjectSnapshot = ProjectSnapshot {
    name: "onos",
    release_ids: [1, 4, 8, 15, 21, 24],
    bugs: [148.0, 105.0, 225.0, 80.0, 2.0, 10.0],
    commits: [383.0, 668.0, 607.0, 598.0, 98.0, 74.0],
    kloc: [124.0, 679.0, 1105.0, 1497.0, 1615.0, 1522.0],
    new_kloc: [43.0, 483.0, 73.0, 156.0, 6.0, 22.0],
    removed_kloc: [2.0, 38.0, 56.0, 49.0, 2.0, 5.0],
    new_kloc_java: [11.0, 76.0, 50.0, 54.0, 5.0, 6.0],
    new_complex_java_functions: [1.0, 15.0, 7.0, 22.0, 0.0, 1.0],
    first_release: (2014, 12, 5),
    cycle_days: 125,
    freeze_lead_days: 21,
};

impl ProjectSnapshot {
    pub fn series(&self, id: &str) -> Option<&[f64; 6]> {
        match id {
            "commits" => Some(&self.commits),
            "kloc" => Some(&self.kloc),
            "new_kloc" => Some(&self.new_kloc),
            "removed_kloc" => Some(&self.removed_kloc),
            "new_kloc_java" => Some(&self.new_kloc_java),
            "new_complex_java_functions" => Some(&self.new_complex_java_functions),
            _ => None,
        }
    }

    pub fn metric_ids() -> Vec<String> {
        SNAPSHOT_METRIC_IDS.iter().map(|s| s.to_string()).collect()
    }

    pub fn metric_vectors(&self) -> Vec<MetricVector> {
        self.release_ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let mut v = MetricVector::new(*id);
                for m in SNAPSHOT_METRIC_IDS {
                    v.set(m, self.series(m).expect("known id")[i]);
                }
                v
            })
            .collect()
    }

    pub fn bug_history(&self) -> BugHistory {
        BugHistory {
            counts: self
                .release_ids
                .iter()
                .zip(self.bugs)
                .map(|(id, b)| ReleaseBugCount {
                    release_id: *id,
                    labeled: b as u64,
                    inferred: 0,
                })
                .collect(),
        }
    }

    fn release_date(&self, ordinal: u32) -> NaiveDate {
        let (y, m, d) = self.first_release;
        let first = NaiveDate::from_ymd_opt(y, m, d).expect("valid date");
        first + chrono::Duration::days(self.cycle_days * (ordinal as i64 - 1))
    }

    /// Reconstructed timeline for the sampled releases.
    pub fn timeline(&self) -> Timeline {
        let releases = self
            .release_ids
            .iter()
            .map(|id| {
                let release_date = self.release_date(*id);
                let freeze = release_date - chrono::Duration::days(self.freeze_lead_days);
                let start = release_date - chrono::Duration::days(self.cycle_days - 7);
                ReleaseSpec {
                    id: *id,
                    name: format!("{}-{:02}", self.name, id),
                    start,
                    freeze,
                    release_date,
                    lts: false,
                }
            })
            .collect();
        Timeline {
            project: self.name.into(),
            releases,
            languages: LanguageConfig {
                filter: vec!["java".into()],
                excluded: vec!["yaml".into(), "xml".into()],
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_timeline;

    #[test]
    fn timelines_are_well_formed() {
        for p in [&ONAP, &ONOS] {
            let t = p.timeline();
            assert!(validate_timeline(&t).is_empty(), "{}", p.name);
            assert_eq!(t.releases.len(), 6);
        }
    }

    #[test]
    fn vectors_align_with_history() {
        for p in [&ONAP, &ONOS] {
            let vs = p.metric_vectors();
            let h = p.bug_history();
            assert_eq!(vs.len(), 6);
            for v in &vs {
                assert!(h.get(v.release_id).is_some());
                assert_eq!(v.values.len(), 6);
            }
        }
    }

    #[test]
    fn first_releases_anchor_the_reconstruction() {
        assert_eq!(ONAP.release_date(1).to_string(), "2017-11-16");
        assert_eq!(ONOS.release_date(1).to_string(), "2014-12-05");
        // ONOS has 24 releases by late 2022 on this cadence.
        let last = ONOS.release_date(24);
        assert!(last > NaiveDate::from_ymd_opt(2022, 1, 1).unwrap());
        assert!(last < NaiveDate::from_ymd_opt(2023, 6, 1).unwrap());
    }

    #[test]
    fn onos_history_predates_onap() {
        let onap = ONAP.timeline();
        let onos = ONOS.timeline();
        let onap_first_freeze = onap.first().unwrap().freeze;
        let before: Vec<u32> = onos
            .releases
            .iter()
            .filter(|r| r.freeze < onap_first_freeze)
            .map(|r| r.id)
            .collect();
        assert_eq!(before, vec![1, 4, 8], "pooling base for the first target");
    }
}
