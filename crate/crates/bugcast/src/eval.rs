//! Evaluation experiments: the four regression variants compared release by
//! release, a sweep over training-window lengths, and pooled cross-project
//! prediction for young projects.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BugHistory, MetricVector, Timeline};
use crate::stats::pearson;
use crate::stats::regression::{
    fit_linear, predict, prediction_error, rows_from_vectors, FitOptions, FitResult,
    PredictionRecord,
};

/// The four model variants under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegressionConfig {
    /// Intercept, unconstrained coefficients.
    Baseline,
    /// Intercept, non-negative coefficients.
    PositiveCoefficients,
    /// No intercept, unconstrained coefficients.
    NoIntercept,
    /// No intercept, non-negative coefficients.
    PositiveNoIntercept,
}

impl RegressionConfig {
    pub const ALL: [RegressionConfig; 4] = [
        RegressionConfig::Baseline,
        RegressionConfig::PositiveCoefficients,
        RegressionConfig::NoIntercept,
        RegressionConfig::PositiveNoIntercept,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RegressionConfig::Baseline => "BLR",
            RegressionConfig::PositiveCoefficients => "LR-PC",
            RegressionConfig::NoIntercept => "LR-woI",
            RegressionConfig::PositiveNoIntercept => "LR-PC+woI",
        }
    }

    pub fn from_label(s: &str) -> Option<RegressionConfig> {
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
    }

    pub fn options(self) -> FitOptions {
        match self {
            RegressionConfig::Baseline => FitOptions { intercept: true, nonneg: false },
            RegressionConfig::PositiveCoefficients => FitOptions { intercept: true, nonneg: true },
            RegressionConfig::NoIntercept => FitOptions { intercept: false, nonneg: false },
            RegressionConfig::PositiveNoIntercept => {
                FitOptions { intercept: false, nonneg: true }
            }
        }
    }
}

/// Everything one evaluated project contributes: its release plan, one
/// metric vector per release, and the reconstructed bug counts.
#[derive(Debug, Clone)]
pub struct ProjectDataset {
    pub name: String,
    pub timeline: Timeline,
    /// One vector per release, timeline order.
    pub metrics: Vec<MetricVector>,
    pub history: BugHistory,
}

impl ProjectDataset {
    /// Bundles and validates: every release needs a metric vector and a bug
    /// count. Vectors are reordered to timeline order.
    pub fn new(
        timeline: Timeline,
        metrics: Vec<MetricVector>,
        history: BugHistory,
    ) -> Result<ProjectDataset> {
        let mut ordered = Vec::with_capacity(timeline.releases.len());
        for r in &timeline.releases {
            let v = metrics
                .iter()
                .find(|v| v.release_id == r.id)
                .ok_or_else(|| {
                    Error::Validation(format!("release {} ({}) has no metric vector", r.id, r.name))
                })?;
            if history.get(r.id).is_none() {
                return Err(Error::Validation(format!(
                    "release {} ({}) has no bug count",
                    r.id, r.name
                )));
            }
            ordered.push(v.clone());
        }
        Ok(ProjectDataset {
            name: timeline.project.clone(),
            timeline,
            metrics: ordered,
            history,
        })
    }

    pub fn len(&self) -> usize {
        self.metrics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty()
    }

    /// Total bug count of the release at timeline position `pos`.
    pub fn bugs_at(&self, pos: usize) -> u64 {
        let id = self.timeline.releases[pos].id;
        self.history.get(id).map(|c| c.total()).unwrap_or(0)
    }
}

/// Errors above this are counted separately; near-zero actual counts make
/// relative error explode and a plain mean hides that.
pub const OUTLIER_ERROR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// Number of predictions with a defined error.
    pub n: usize,
    /// Count of errors above [`OUTLIER_ERROR`].
    pub outliers: usize,
}

/// Order statistics over the defined errors of a batch of predictions.
/// Records whose error is undefined (actual count zero) are not part of `n`.
pub fn summarize(records: &[PredictionRecord]) -> Result<ErrorSummary> {
    let mut errors: Vec<f64> = records.iter().filter_map(|r| r.error).collect();
    if errors.is_empty() {
        return Err(Error::Validation(
            "no prediction in this batch has a defined error".into(),
        ));
    }
    errors.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
    let n = errors.len();
    let median = if n % 2 == 1 {
        errors[n / 2]
    } else {
        (errors[n / 2 - 1] + errors[n / 2]) / 2.0
    };
    Ok(ErrorSummary {
        median,
        mean: errors.iter().sum::<f64>() / n as f64,
        max: errors[n - 1],
        min: errors[0],
        n,
        outliers: errors.iter().filter(|e| **e > OUTLIER_ERROR).count(),
    })
}

/// One experiment row: a labelled batch of per-release predictions.
#[derive(Debug, Clone)]
pub struct EvalRow {
    /// Config label, window size, or pool description.
    pub label: String,
    pub records: Vec<PredictionRecord>,
    /// Releases that could not be predicted, with the reason.
    pub failures: Vec<(u32, String)>,
    /// Absent when no record has a defined error.
    pub summary: Option<ErrorSummary>,
}

impl EvalRow {
    fn build(label: String, records: Vec<PredictionRecord>, failures: Vec<(u32, String)>) -> Self {
        let summary = summarize(&records).ok();
        EvalRow { label, records, failures, summary }
    }
}

/// Fits on `train` and predicts one target release.
fn fit_predict_one(
    selected: &[String],
    train: &[MetricVector],
    train_bugs: &[f64],
    train_ids: &[u32],
    target: &MetricVector,
    actual: u64,
    options: FitOptions,
) -> Result<PredictionRecord> {
    let rows = rows_from_vectors(train, selected)?;
    let fit = fit_linear(selected, &rows, train_bugs, train_ids, options)?;
    let p = predict(&fit.model, target)?;
    Ok(PredictionRecord {
        release_id: target.release_id,
        predicted: p.value,
        clamped: p.clamped,
        actual,
        error: prediction_error(p.value, actual),
    })
}

/// Train on everything before `target_id`, under the given options. The
/// model a plain forecast of the next release would use.
pub fn fit_for_target(
    ds: &ProjectDataset,
    selected: &[String],
    target_id: u32,
    options: FitOptions,
) -> Result<FitResult> {
    let pos = ds
        .timeline
        .position(target_id)
        .ok_or_else(|| Error::Validation(format!("unknown release id {target_id}")))?;
    if pos == 0 {
        return Err(Error::Validation(format!(
            "release {target_id} is the first release; no training data exists before it"
        )));
    }
    let rows = rows_from_vectors(&ds.metrics[..pos], selected)?;
    let bugs: Vec<f64> = (0..pos).map(|i| ds.bugs_at(i) as f64).collect();
    let ids: Vec<u32> = ds.timeline.releases[..pos].iter().map(|r| r.id).collect();
    fit_linear(selected, &rows, &bugs, &ids, options)
}

/// For every release from the second onward, fit each variant on all earlier
/// releases and predict. Returns one row per variant.
///
/// Early fits are underdetermined (one training row, several coefficients);
/// they resolve to the minimum-norm solution and their errors are reported
/// like any other, not hidden.
pub fn config_sweep(ds: &ProjectDataset, selected: &[String]) -> Result<Vec<EvalRow>> {
    if ds.len() < 3 {
        return Err(Error::Validation(format!(
            "config sweep needs at least 3 releases, got {}",
            ds.len()
        )));
    }
    let mut out = Vec::new();
    for config in RegressionConfig::ALL {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for k in 1..ds.len() {
            let target = &ds.metrics[k];
            let bugs: Vec<f64> = (0..k).map(|i| ds.bugs_at(i) as f64).collect();
            let ids: Vec<u32> = ds.timeline.releases[..k].iter().map(|r| r.id).collect();
            match fit_predict_one(
                selected,
                &ds.metrics[..k],
                &bugs,
                &ids,
                target,
                ds.bugs_at(k),
                config.options(),
            ) {
                Ok(rec) => records.push(rec),
                Err(e) => failures.push((target.release_id, e.to_string())),
            }
        }
        out.push(EvalRow::build(config.label().to_string(), records, failures));
    }
    Ok(out)
}

/// One window length's worth of rolling predictions.
#[derive(Debug, Clone)]
pub struct WindowRow {
    pub window: usize,
    pub row: EvalRow,
    /// Summary over the project's last four releases only.
    pub last4: Option<ErrorSummary>,
    /// Median of the selected metrics' correlations against bugs, taken over
    /// every training slice of this window length. Undefined for w = 1.
    pub pcc_median: Option<f64>,
    pub pcc_mean: Option<f64>,
}

/// Rolling-window evaluation: for window length `w`, each release after the
/// first `w` is predicted from exactly the `w` releases before it, using the
/// non-negative no-intercept variant.
pub fn windowed_eval(
    ds: &ProjectDataset,
    selected: &[String],
    windows: &[usize],
) -> Result<Vec<WindowRow>> {
    let n = ds.len();
    for &w in windows {
        if w == 0 {
            return Err(Error::Validation("window size 0 is meaningless".into()));
        }
        if w >= n {
            return Err(Error::Validation(format!(
                "window {w} needs more than {w} releases, project has {n}"
            )));
        }
    }
    let options = RegressionConfig::PositiveNoIntercept.options();
    let mut out = Vec::new();
    for &w in windows {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        let mut pccs = Vec::new();
        for k in w..n {
            let train = &ds.metrics[k - w..k];
            let bugs: Vec<f64> = (k - w..k).map(|i| ds.bugs_at(i)  as f64).collect();
            let ids: Vec<u32> =
                ds.timeline.releases[k - w..k].iter().map(|r| r.id).collect();
            for id in selected {
                let xs: Vec<f64> = train.iter().filter_map(|v| v.get(id)).collect();
                if xs.len() == train.len() {
                    if let Ok(Some(p)) = pearson(&xs, &bugs) {
                        pccs.push(p);
                    }
                }
            }
            match fit_predict_one(
                selected,
                train,
                &bugs,
                &ids,
                &ds.metrics[k],
                ds.bugs_at(k),
                options,
            ) {
                Ok(rec) => records.push(rec),
                Err(e) => failures.push((ds.metrics[k].release_id, e.to_string())),
            }
        }

        let last4_ids: Vec<u32> = ds.timeline.releases[n.saturating_sub(4)..]
            .iter()
            .map(|r| r.id)
            .collect();
        let last4_records: Vec<PredictionRecord> = records
            .iter()
            .filter(|r| last4_ids.contains(&r.release_id))
            .cloned()
            .collect();
        let (pcc_median, pcc_mean) = if pccs.is_empty() {
            (None, None)
        } else {
            pccs.sort_by(|a, b| a.partial_cmp(b).expect("pcc is finite"));
            let m = pccs.len();
            let median = if m % 2 == 1 {
                pccs[m / 2]
            } else {
                (pccs[m / 2 - 1] + pccs[m / 2]) / 2.0
            };
            (Some(median), Some(pccs.iter().sum::<f64>() / m as f64))
        };
        out.push(WindowRow {
            window: w,
            row: EvalRow::build(format!("w={w}"), records, failures),
            last4: summarize(&last4_records).ok(),
            pcc_median,
            pcc_mean,
        });
    }
    Ok(out)
}

/// Pools source releases frozen before the target release's freeze together
/// with the target's own earlier releases, then fits the non-negative
/// no-intercept variant. Returns the fit and the two pool sizes.
pub fn pooled_fit(
    source: &ProjectDataset,
    target: &ProjectDataset,
    target_id: u32,
    selected: &[String],
) -> Result<(FitResult, usize, usize)> {
    let pos = target
        .timeline
        .position(target_id)
        .ok_or_else(|| Error::Validation(format!("unknown target release id {target_id}")))?;
    let freeze = target.timeline.releases[pos].freeze;

    let mut train: Vec<MetricVector> = Vec::new();
    let mut bugs: Vec<f64> = Vec::new();
    let mut ids: Vec<u32> = Vec::new();
    for (i, r) in source.timeline.releases.iter().enumerate() {
        if r.freeze < freeze {
            train.push(source.metrics[i].clone());
            bugs.push(source.bugs_at(i) as f64);
            ids.push(r.id);
        }
    }
    let source_rows = train.len();
    for i in 0..pos {
        train.push(target.metrics[i].clone());
        bugs.push(target.bugs_at(i) as f64);
        ids.push(target.timeline.releases[i].id);
    }
    let target_rows = pos;
    if train.is_empty() {
        return Err(Error::Validation(format!(
            "empty training pool for target release {target_id}: no source release frozen \
             before {freeze} and no earlier target release"
        )));
    }
    let rows = rows_from_vectors(&train, selected)?;
    let fit = fit_linear(
        selected,
        &rows,
        &bugs,
        &ids,
        RegressionConfig::PositiveNoIntercept.options(),
    )?;
    Ok((fit, source_rows, target_rows))
}

/// Cross-project evaluation over every target release. Two rows come back:
/// source pooled with earlier target releases, and source alone.
pub fn cross_project_eval(
    source: &ProjectDataset,
    target: &ProjectDataset,
    selected: &[String],
) -> Result<Vec<EvalRow>> {
    let first_freeze = target
        .timeline
        .first()
        .ok_or_else(|| Error::Validation("target project has no releases".into()))?
        .freeze;
    if !source.timeline.releases.iter().any(|r| r.freeze < first_freeze) {
        return Err(Error::Validation(format!(
            "no {} release is frozen before the first {} release; nothing to pool",
            source.name, target.name
        )));
    }

    let mut pooled = (Vec::new(), Vec::new());
    let mut source_only = (Vec::new(), Vec::new());
    for (k, r) in target.timeline.releases.iter().enumerate() {
        let actual = target.bugs_at(k);
        match pooled_fit(source, target, r.id, selected) {
            Ok((fit, _, _)) => match predict(&fit.model, &target.metrics[k]) {
                Ok(p) => pooled.0.push(PredictionRecord {
                    release_id: r.id,
                    predicted: p.value,
                    clamped: p.clamped,
                    actual,
                    error: prediction_error(p.value, actual),
                }),
                Err(e) => pooled.1.push((r.id, e.to_string())),
            },
            Err(e) => pooled.1.push((r.id, e.to_string())),
        }

        // Same pool without the target's own history.
        let sources: Vec<MetricVector> = source
            .timeline
            .releases
            .iter()
            .enumerate()
            .filter(|(_, s)| s.freeze < r.freeze)
            .map(|(i, _)| source.metrics[i].clone())
            .collect();
        let bugs: Vec<f64> = source
            .timeline
            .releases
            .iter()
            .enumerate()
            .filter(|(_, s)| s.freeze < r.freeze)
            .map(|(i, _)| source.bugs_at(i) as f64)
            .collect();
        let ids: Vec<u32> = source
            .timeline
            .releases
            .iter()
            .filter(|s| s.freeze < r.freeze)
            .map(|s| s.id)
            .collect();
        if sources.is_empty() {
            source_only.1.push((r.id, "empty source pool".to_string()));
            continue;
        }
        match fit_predict_one(
            selected,
            &sources,
            &bugs,
            &ids,
            &target.metrics[k],
            actual,
            RegressionConfig::PositiveNoIntercept.options(),
        ) {
            Ok(rec) => source_only.0.push(rec),
            Err(e) => source_only.1.push((r.id, e.to_string())),
        }
    }

    Ok(vec![
        EvalRow::build(format!("{}+{}", source.name, target.name), pooled.0, pooled.1),
        EvalRow::build(source.name.clone(), source_only.0, source_only.1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LanguageConfig, ReleaseBugCount, ReleaseSpec};
    use chrono::NaiveDate;

    fn day(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    /// A dataset with one `commits` metric driving bugs through `law`, plus
    /// a constant `noise` metric that never correlates.
    fn dataset(name: &str, commits: &[f64], law: impl Fn(usize, f64) -> f64) -> ProjectDataset {
        dataset_from(name, 2020, commits, law)
    }

    fn dataset_from(
        name: &str,
        start_year: i32,
        commits: &[f64],
        law: impl Fn(usize, f64) -> f64,
    ) -> ProjectDataset {
        let releases: Vec<ReleaseSpec> = (0..commits.len())
            .map(|i| {
                let base = day(&format!("{}-01-01", start_year)) + chrono::Duration::days(90 * i as i64);
                ReleaseSpec {
                    id: i as u32 + 1,
                    name: format!("v{}", i + 1),
                    start: base,
                    freeze: base + chrono::Duration::days(60),
                    release_date: base + chrono::Duration::days(80),
                    lts: false,
                }
            })
            .collect();
        let timeline = Timeline {
            project: name.into(),
            releases,
            languages: LanguageConfig::default(),
        };
        let metrics: Vec<MetricVector> = commits
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut v = MetricVector::new(i as u32 + 1);
                v.set("commits", *c);
                v.set("noise", 7.0);
                v
            })
            .collect();
        let history = BugHistory {
            counts: commits
                .iter()
                .enumerate()
                .map(|(i, c)| ReleaseBugCount {
                    release_id: i as u32 + 1,
                    labeled: law(i, *c).round() as u64,
                    inferred: 0,
                })
                .collect(),
        };
        ProjectDataset::new(timeline, metrics, history).unwrap()
    }

    fn commits_metric() -> Vec<String> {
        vec!["commits".to_string()]
    }

    #[test]
    fn labels_round_trip() {
        for c in RegressionConfig::ALL {
            assert_eq!(RegressionConfig::from_label(c.label()), Some(c));
        }
        assert_eq!(RegressionConfig::from_label("blr"), Some(RegressionConfig::Baseline));
        assert_eq!(RegressionConfig::from_label("nope"), None);
        assert!(RegressionConfig::Baseline.options().intercept);
        assert!(!RegressionConfig::PositiveNoIntercept.options().intercept);
        assert!(RegressionConfig::PositiveNoIntercept.options().nonneg);
    }

    fn rec(release_id: u32, predicted: f64, actual: u64) -> PredictionRecord {
        PredictionRecord {
            release_id,
            predicted,
            clamped: false,
            actual,
            error: prediction_error(predicted, actual),
        }
    }

    #[test]
    fn summary_of_one_and_two() {
        let one = summarize(&[rec(1, 110.0, 100)]).unwrap();
        assert_eq!(one.median, 0.1);
        assert_eq!(one.mean, 0.1);
        assert_eq!(one.max, 0.1);
        assert_eq!(one.min, 0.1);
        assert_eq!(one.n, 1);

        let two = summarize(&[rec(1, 110.0, 100), rec(2, 130.0, 100)]).unwrap();
        assert!((two.median - 0.2).abs() < 1e-12);
        assert!((two.mean - 0.2).abs() < 1e-12);
        assert_eq!(two.min, 0.1);
        assert_eq!(two.max, 0.3);
    }

    #[test]
    fn summary_matches_archived_error_tables() {
        // Errors whose order statistics reproduce one published per-variant
        // row: median 0.12, mean 0.195, max 0.549, min 0.036.
        let errors = [0.036, 0.05, 0.08, 0.1, 0.12, 0.17, 0.25, 0.4, 0.549];
        let records: Vec<PredictionRecord> = errors
            .iter()
            .enumerate()
            .map(|(i, e)| rec(i as u32 + 2, 1000.0 * (1.0 + e), 1000))
            .collect();
        let s = summarize(&records).unwrap();
        assert!((s.median - 0.12).abs() < 1e-9);
        assert!((s.mean - 0.195).abs() < 1e-9);
        assert!((s.max - 0.549).abs() < 1e-9);
        assert!((s.min - 0.036).abs() < 1e-9);
        assert_eq!(s.outliers, 0);

        // And a skewed row with a blow-up: median 0.486, mean 1.634,
        // max 11.476, min 0.038, one outlier above 5.
        let errors = [0.038, 0.038, 0.038, 0.038, 0.486, 0.486, 0.486, 0.486, 2.768, 11.476];
        let records: Vec<PredictionRecord> = errors
            .iter()
            .enumerate()
            .map(|(i, e)| rec(i as u32 + 2, 1000.0 * (1.0 + e), 1000))
            .collect();
        let s = summarize(&records).unwrap();
        assert!((s.median - 0.486).abs() < 1e-9);
        assert!((s.mean - 1.634).abs() < 1e-9);
        assert!((s.max - 11.476).abs() < 1e-9);
        assert!((s.min - 0.038).abs() < 1e-9);
        assert_eq!(s.outliers, 1);
        assert!(s.min <= s.median && s.median <= s.max);
        assert!(s.min <= s.mean && s.mean <= s.max);
    }

    #[test]
    fn summary_requires_a_defined_error() {
        assert!(summarize(&[]).is_err());
        assert!(summarize(&[rec(1, 5.0, 0)]).is_err(), "actual 0 has no defined error");
    }

    #[test]
    fn dataset_validation_catches_gaps() {
        let ds = dataset("p", &[10.0, 20.0, 30.0], |_, c| 3.0 * c);
        let missing_metric =
            ProjectDataset::new(ds.timeline.clone(), ds.metrics[..2].to_vec(), ds.history.clone());
        assert!(missing_metric.is_err());
        let missing_count = ProjectDataset::new(
            ds.timeline.clone(),
            ds.metrics.clone(),
            BugHistory { counts: vec![] },
        );
        assert!(missing_count.is_err());
    }

    #[test]
    fn exact_proportional_law_is_recovered_by_every_variant() {
        let ds = dataset("exact", &[10.0, 14.0, 25.0, 40.0, 31.0, 18.0], |_, c| 3.0 * c);
        let rows = config_sweep(&ds, &commits_metric()).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!(row.failures.is_empty(), "{}: {:?}", row.label, row.failures);
            assert_eq!(row.records.len(), 5);
            // Intercept variants need two training rows to pin both
            // parameters; after that everything is exact.
            let from = if RegressionConfig::from_label(&row.label).unwrap().options().intercept {
                1
            } else {
                0
            };
            for r in &row.records[from..] {
                assert!(
                    r.error.unwrap() < 1e-9,
                    "{} release {}: error {:?}",
                    row.label,
                    r.release_id,
                    r.error
                );
            }
            let s = row.summary.as_ref().unwrap();
            assert_eq!(s.n, 5);
        }
    }

    #[test]
    fn summaries_match_their_own_records() {
        let ds = dataset("law", &[10.0, 14.0, 25.0, 40.0, 31.0, 18.0], |i, c| {
            2.0 * c + i as f64
        });
        for row in config_sweep(&ds, &commits_metric()).unwrap() {
            let again = summarize(&row.records).ok();
            assert_eq!(row.summary, again, "{}", row.label);
        }
    }

    #[test]
    fn negative_slope_law_penalizes_the_constrained_fit() {
        // Bugs decline as commits rise; a non-negative slope cannot track it.
        let ds = dataset("decline", &[10.0, 20.0, 30.0, 40.0, 50.0, 60.0], |_, c| {
            200.0 - 2.0 * c
        });
        let rows = config_sweep(&ds, &commits_metric()).unwrap();
        let mean_from_third = |label: &str| {
            let row = rows.iter().find(|r| r.label == label).unwrap();
            let errs: Vec<f64> = row.records[1..].iter().filter_map(|r| r.error).collect();
            errs.iter().sum::<f64>() / errs.len() as f64
        };
        let blr = mean_from_third("BLR");
        let lrpc = mean_from_third("LR-PC");
        assert!(blr < 1e-9, "unconstrained fit nails the line: {blr}");
        assert!(lrpc > blr, "clamped slope must cost accuracy: {lrpc} vs {blr}");
    }

    #[test]
    fn sweep_needs_three_releases() {
        let ds = dataset("tiny", &[10.0, 20.0], |_, c| c);
        assert!(config_sweep(&ds, &commits_metric()).is_err());
    }

    #[test]
    fn windows_recover_noiseless_law_everywhere() {
        let ds = dataset("w", &[10.0, 14.0, 25.0, 40.0, 31.0, 18.0], |_, c| 3.0 * c);
        let rows = windowed_eval(&ds, &commits_metric(), &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(rows.len(), 5);
        for wr in &rows {
            assert_eq!(wr.row.records.len(), ds.len() - wr.window);
            for r in &wr.row.records {
                assert!(r.error.unwrap() < 1e-9, "w={} release {}", wr.window, r.release_id);
            }
            if wr.window == 1 {
                assert!(wr.pcc_median.is_none(), "one point has no correlation");
            } else {
                // Exact law means every training-slice correlation is 1.
                assert!((wr.pcc_median.unwrap() - 1.0).abs() < 1e-9);
                assert!((wr.pcc_mean.unwrap() - 1.0).abs() < 1e-9);
            }
        }
        let longest = rows.last().unwrap();
        assert_eq!(longest.row.records.len(), 1);
        let s = longest.row.summary.as_ref().unwrap();
        assert_eq!(s.min, s.max);
        assert_eq!(s.median, s.mean);
    }

    #[test]
    fn window_must_fit_inside_the_project() {
        let ds = dataset("w", &[10.0, 20.0, 30.0], |_, c| c);
        assert!(windowed_eval(&ds, &commits_metric(), &[3]).is_err());
        assert!(windowed_eval(&ds, &commits_metric(), &[0]).is_err());
    }

    #[test]
    fn longest_window_nests_into_the_config_sweep() {
        let ds = dataset("nest", &[10.0, 14.0, 25.0, 40.0, 31.0, 18.0], |i, c| {
            2.0 * c + (i as f64) * 3.0
        });
        let sweep = config_sweep(&ds, &commits_metric()).unwrap();
        let pcwoi = sweep.iter().find(|r| r.label == "LR-PC+woI").unwrap();
        let last_sweep = pcwoi.records.last().unwrap();
        let windows = windowed_eval(&ds, &commits_metric(), &[ds.len() - 1]).unwrap();
        let last_window = windows[0].row.records.last().unwrap();
        assert_eq!(last_window.release_id, last_sweep.release_id);
        assert!((last_window.predicted - last_sweep.predicted).abs() < 1e-9);
    }

    #[test]
    fn recent_windows_win_after_a_regime_change() {
        let commits: Vec<f64> = vec![12.0, 19.0, 24.0, 16.0, 30.0, 22.0, 27.0, 18.0, 33.0, 25.0];
        // Releases 6+ ship triple the bugs per commit.
        let ds = dataset("shift", &commits, |i, c| if i < 5 { 2.0 * c } else { 6.0 * c });
        let short = windowed_eval(&ds, &commits_metric(), &[3]).unwrap();
        let sweep = config_sweep(&ds, &commits_metric()).unwrap();
        let all_history = sweep.iter().find(|r| r.label == "LR-PC+woI").unwrap();
        for wr in &short[0].row.records {
            if wr.release_id >= 8 {
                let all = all_history
                    .records
                    .iter()
                    .find(|r| r.release_id == wr.release_id)
                    .unwrap();
                assert!(
                    wr.error.unwrap() < all.error.unwrap(),
                    "release {}: w3 {} vs all {}",
                    wr.release_id,
                    wr.error.unwrap(),
                    all.error.unwrap()
                );
            }
        }
    }

    #[test]
    fn pccs_are_collected_per_training_slice() {
        // Correlation flips sign halfway; windowed PCCs must reflect the
        // slices, not the whole series.
        let ds = dataset("flip", &[10.0, 20.0, 30.0, 30.0, 20.0, 10.0], |i, _| {
            (i as f64 + 1.0) * 10.0
        });
        let rows = windowed_eval(&ds, &commits_metric(), &[2]).unwrap();
        let median = rows[0].pcc_median.unwrap();
        assert!(median.abs() <= 1.0);
        assert!(rows[0].pcc_mean.unwrap() < 1.0, "a flat or opposing slice must drag the mean");
    }

    #[test]
    fn twin_projects_pool_losslessly() {
        let law = |_: usize, c: f64| 3.0 * c;
        let source = dataset_from("old", 2014, &[11.0, 17.0, 23.0, 29.0, 35.0], law);
        let target = dataset_from("young", 2020, &[13.0, 19.0, 31.0, 37.0], law);
        let rows = cross_project_eval(&source, &target, &commits_metric()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, "old+young");
        assert_eq!(rows[1].label, "old");
        for row in &rows {
            assert_eq!(row.records.len(), 4, "{}: {:?}", row.label, row.failures);
            for r in &row.records {
                assert!(r.error.unwrap() < 1e-9, "{} release {}", row.label, r.release_id);
            }
        }
        // The first target release is predictable with zero target history.
        assert_eq!(rows[0].records[0].release_id, 1);

        let (fit, source_rows, target_rows) =
            pooled_fit(&source, &target, 3, &commits_metric()).unwrap();
        assert_eq!(source_rows, 5);
        assert_eq!(target_rows, 2);
        assert!((fit.model.coefficients[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_source_changes_nothing_under_the_shared_law() {
        let law = |_: usize, c: f64| 3.0 * c;
        let source = dataset_from("src", 2014, &[11.0, 17.0, 23.0, 29.0], law);
        let doubled = dataset_from("src", 2014, &[22.0, 34.0, 46.0, 58.0], law);
        let target = dataset_from("tgt", 2020, &[13.0, 19.0, 31.0], law);
        let a = cross_project_eval(&source, &target, &commits_metric()).unwrap();
        let b = cross_project_eval(&doubled, &target, &commits_metric()).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (pa, pb) in ra.records.iter().zip(&rb.records) {
                assert!((pa.predicted - pb.predicted).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pooling_requires_an_older_source() {
        let law = |_: usize, c: f64| 2.0 * c;
        let source = dataset_from("late", 2022, &[10.0, 20.0], law);
        let target = dataset_from("early", 2018, &[10.0, 20.0, 30.0], law);
        assert!(cross_project_eval(&source, &target, &commits_metric()).is_err());
    }
}
