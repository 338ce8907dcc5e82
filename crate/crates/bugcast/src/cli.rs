//! Command-line front end. Every command reads the project descriptor named
//! by `--project`, writes its artifacts under `--out`, and logs single-line
//! records to stderr; stdout carries the human-readable result only.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{
    config_sweep, cross_project_eval, fit_for_target, pooled_fit, windowed_eval, EvalRow,
    ProjectDataset, RegressionConfig,
};
use crate::ingest::{assign_all, parse_bug_export, AssignmentSource, ExportFormat, ParseOptions};
use crate::metrics::extract_all;
use crate::metrics::git::RepoHandle;
use crate::model::descriptor::ProjectDescriptor;
use crate::model::{
    validate_timeline, BugHistory, MetricCatalog, MetricVector, ReleaseBugCount, Timeline,
};
use crate::report;
use crate::stats::regression::{predict, FitOptions, RegressionModel};
use crate::stats::{correlation_matrix, select_metrics, SelectedMetric, SelectionPolicy};
use crate::synth::{generate, SynthConfig};

#[derive(Parser, Debug)]
#[command(
    name = "bugcast",
    version,
    about = "Predict per-release bug counts from mined repository metrics"
)]
pub struct Cli {
    #[command(flatten)]
    pub globals: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Project descriptor (TOML).
    #[arg(long, global = true, value_name = "DESCRIPTOR")]
    pub project: Option<PathBuf>,

    /// Directory for output artifacts.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Metric cache directory; defaults to `<out>/cache`.
    #[arg(long, global = true, value_name = "DIR")]
    pub cache: Option<PathBuf>,

    /// Grace period in days for late bug reports; reported in logs, the
    /// freeze-date partition itself is total and needs no grace.
    #[arg(long, global = true, default_value_t = 14)]
    pub grace_days: u32,

    /// Keep metrics whose |PCC| strictly exceeds this.
    #[arg(long, global = true, default_value_t = 0.7)]
    pub min_pcc: f64,

    /// Keep at most this many metrics.
    #[arg(long, global = true, default_value_t = 5)]
    pub max_metrics: usize,

    /// Fit with an intercept term (default).
    #[arg(long, global = true, overrides_with = "no_intercept")]
    pub intercept: bool,

    /// Fit without an intercept term.
    #[arg(long, global = true, overrides_with = "intercept")]
    pub no_intercept: bool,

    /// Constrain coefficients to be non-negative.
    #[arg(long, global = true, overrides_with = "free")]
    pub nonneg: bool,

    /// Allow coefficients of any sign (default).
    #[arg(long, global = true, overrides_with = "nonneg")]
    pub free: bool,

    /// Window sizes for `evaluate windows`: "1..9", "4", or "2,4,6".
    #[arg(long, global = true, value_name = "LIST")]
    pub windows: Option<String>,

    /// Source project descriptor for cross-project commands.
    #[arg(long, global = true, value_name = "DESCRIPTOR")]
    pub source: Option<PathBuf>,
}

impl GlobalArgs {
    fn fit_options(&self) -> FitOptions {
        let mut o = FitOptions::default();
        if self.no_intercept {
            o.intercept = false;
        }
        if self.intercept {
            o.intercept = true;
        }
        if self.nonneg {
            o.nonneg = true;
        }
        if self.free {
            o.nonneg = false;
        }
        o
    }

    fn policy(&self) -> SelectionPolicy {
        SelectionPolicy {
            min_abs_pcc: self.min_pcc,
            max_metrics: self.max_metrics,
            ..SelectionPolicy::default()
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a tracker export into bug_history.csv plus an assignment log.
    IngestBugs(IngestArgs),
    /// Mine per-release code metrics from the repository into metrics.csv.
    ExtractMetrics,
    /// Correlate every metric against bugs; write correlation.csv and
    /// selected_metrics.csv.
    Correlate,
    /// Fit a regression model on past releases; write model.toml.
    Fit(FitArgs),
    /// Predict the bug count of one release.
    Predict(PredictArgs),
    /// Run an experiment suite: configs, windows, or cross.
    Evaluate(EvaluateArgs),
    /// Cross-project evaluation; shorthand for `evaluate cross`.
    CrossEval,
    /// Generate a synthetic fixture project under --out.
    GenSynthetic(GenSyntheticArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Tracker export file; defaults to the descriptor's `export` entry.
    pub export: Option<PathBuf>,
    /// Export format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Train on releases strictly before this one; default is every release.
    #[arg(long)]
    pub target: Option<u32>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Release id to predict.
    #[arg(long)]
    pub target: u32,
    /// Borrow training data from another project (its descriptor path).
    #[arg(long, value_name = "DESCRIPTOR")]
    pub cross_from: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Experiment {
    /// The four regression variants, each release predicted from all
    /// earlier ones.
    Configs,
    /// Rolling training windows of the sizes given by --windows.
    Windows,
    /// Pool an earlier project's releases to predict this one's.
    Cross,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
}

#[derive(Args, Debug)]
pub struct GenSyntheticArgs {
    #[arg(long, default_value = "synthetica")]
    pub name: String,
    #[arg(long, default_value_t = 10)]
    pub releases: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Shift the planted bug law from this release onward.
    #[arg(long)]
    pub regime_at: Option<usize>,
    /// Start date of the first release window (YYYY-MM-DD).
    #[arg(long)]
    pub start: Option<chrono::NaiveDate>,
}

fn log(level: &str, fields: &str) {
    eprintln!("level={level} {fields}");
}

/// Everything a command needs from the global flags and the descriptor.
struct Workspace {
    descriptor_path: PathBuf,
    descriptor: ProjectDescriptor,
    timeline: Timeline,
    catalog: MetricCatalog,
    out: PathBuf,
    cache: PathBuf,
}

impl Workspace {
    fn open(globals: &GlobalArgs) -> Result<Workspace> {
        let descriptor_path = globals
            .project
            .clone()
            .ok_or_else(|| Error::Usage("--project <descriptor> is required".into()))?;
        let descriptor = ProjectDescriptor::load(&descriptor_path)?;
        let timeline = descriptor.timeline();
        let violations = validate_timeline(&timeline);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::Validation(format!(
                "{}: {}",
                descriptor_path.display(),
                list.join("; ")
            )));
        }
        let out = globals.out.clone();
        let cache = globals.cache.clone().unwrap_or_else(|| out.join("cache"));
        if out == cache {
            return Err(Error::Usage(
                "--out and --cache must be distinct directories".into(),
            ));
        }
        Ok(Workspace {
            descriptor_path,
            descriptor,
            timeline,
            catalog: MetricCatalog::standard(),
            out,
            cache,
        })
    }

    fn artifact(&self, name: impl AsRef<Path>) -> PathBuf {
        self.out.join(name.as_ref())
    }

    fn export_path(&self, explicit: Option<&Path>) -> Result<PathBuf> {
        if let Some(p) = explicit {
            return Ok(p.to_path_buf());
        }
        match &self.descriptor.project.export {
            Some(entry) => Ok(ProjectDescriptor::resolve(&self.descriptor_path, entry)),
            None => Err(Error::Usage(
                "no export given and the descriptor has no project.export entry".into(),
            )),
        }
    }

    /// Bug history from the tracker export, or from a previously written
    /// bug_history.csv when the descriptor names no export.
    fn load_history(&self) -> Result<BugHistory> {
        match self.export_path(None) {
            Ok(path) => Ok(self.ingest(&path, None)?.0),
            Err(_) => {
                let fallback = self.artifact("bug_history.csv");
                if fallback.exists() {
                    log("info", &format!("event=history source={}", fallback.display()));
                    return report::read_bug_history(&fallback);
                }
                Err(Error::Usage(
                    "descriptor has no project.export entry and no bug_history.csv exists yet"
                        .into(),
                ))
            }
        }
    }

    fn ingest(
        &self,
        path: &Path,
        format: Option<FormatArg>,
    ) -> Result<(BugHistory, IngestStats)> {
        let data = match std::fs::read(path) {
            Ok(d) => d,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::InputNotFound(path.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        let format = match format {
            Some(FormatArg::Json) => ExportFormat::Json,
            Some(FormatArg::Csv) => ExportFormat::Csv,
            None => match path.extension().and_then(|e| e.to_str()) {
                Some(e) if e.eq_ignore_ascii_case("csv") => ExportFormat::Csv,
                Some(e) if e.eq_ignore_ascii_case("json") => ExportFormat::Json,
                _ => {
                    return Err(Error::Usage(format!(
                        "cannot infer export format of '{}'; pass --format",
                        path.display()
                    )))
                }
            },
        };
        let outcome = parse_bug_export(&data, format, &ParseOptions::default())?;
        for w in &outcome.warnings {
            log("warn", &format!("event=parse msg=\"{w}\""));
        }
        let (assignments, warnings) = assign_all(&outcome.bugs, &self.timeline);
        for w in &warnings {
            log("warn", &format!("event=assign msg=\"{w}\""));
        }
        let history = crate::ingest::history_from_assignments(&assignments, &self.timeline);
        let stats = IngestStats {
            issues_seen: outcome.issues_seen,
            bugs: outcome.bugs.len(),
            skipped_by_type: outcome.non_bug_count(),
            assignments: assignments
                .iter()
                .map(|a| (a.bug_key.clone(), a.release_id, a.source))
                .collect(),
        };
        Ok((history, stats))
    }

    /// Metric vectors from the repository (cached), or from a previously
    /// written metrics.csv when the descriptor names no repository.
    fn load_metrics(&self) -> Result<Vec<MetricVector>> {
        match &self.descriptor.project.repo {
            Some(entry) => {
                let repo_path = ProjectDescriptor::resolve(&self.descriptor_path, entry);
                let repo = RepoHandle::open(&repo_path)?;
                let (outcomes, failures) =
                    extract_all(&repo, &self.timeline, &self.catalog, Some(&self.cache));
                for (id, e) in &failures {
                    log("error", &format!("event=extract release={id} msg=\"{e}\""));
                }
                if let Some((id, e)) = failures.into_iter().next() {
                    return Err(Error::Extraction(format!("release {id}: {e}")));
                }
                for o in &outcomes {
                    for w in &o.warnings {
                        log("warn", &format!("event=extract release={} msg=\"{w}\"", o.vector.release_id));
                    }
                    log(
                        "info",
                        &format!(
                            "event=extract release={} cache={}",
                            o.vector.release_id,
                            if o.cache_hit { "hit" } else { "miss" }
                        ),
                    );
                }
                Ok(outcomes.into_iter().map(|o| o.vector).collect())
            }
            None => {
                let fallback = self.artifact("metrics.csv");
                if fallback.exists() {
                    log("info", &format!("event=metrics source={}", fallback.display()));
                    return report::read_metrics(&fallback, &self.catalog);
                }
                Err(Error::Usage(
                    "descriptor has no project.repo entry and no metrics.csv exists yet".into(),
                ))
            }
        }
    }

    fn dataset(&self) -> Result<ProjectDataset> {
        let metrics = self.load_metrics()?;
        let history = self.load_history()?;
        ProjectDataset::new(self.timeline.clone(), metrics, history)
    }
}

struct IngestStats {
    issues_seen: usize,
    bugs: usize,
    skipped_by_type: usize,
    assignments: Vec<(String, u32, AssignmentSource)>,
}

fn selected_ids(selected: &[SelectedMetric]) -> Vec<String> {
    selected.iter().map(|m| m.id.clone()).collect()
}

fn screen_metrics(
    ds: &ProjectDataset,
    catalog: &MetricCatalog,
    policy: &SelectionPolicy,
) -> Result<Vec<SelectedMetric>> {
    let ids: Vec<String> = catalog.entries().iter().map(|d| d.id.clone()).collect();
    let matrix = correlation_matrix(&ds.metrics, &ds.history, &ids)?;
    Ok(select_metrics(&matrix, policy))
}

fn config_label(options: FitOptions) -> &'static str {
    RegressionConfig::ALL
        .into_iter()
        .find(|c| c.options() == options)
        .map(|c| c.label())
        .unwrap_or("custom")
}

fn describe_model(model: &RegressionModel, pccs: &[SelectedMetric]) -> String {
    let mut out = format!(
        "model: {} (intercept {}, coefficients {})\n",
        config_label(model.options),
        if model.options.intercept { "yes" } else { "no" },
        if model.options.nonneg { "non-negative" } else { "free" },
    );
    if model.options.intercept {
        out.push_str(&format!("  intercept            {:>10.4}\n", model.intercept));
    }
    for (id, coef) in model.metric_ids.iter().zip(&model.coefficients) {
        let pcc = pccs
            .iter()
            .find(|m| &m.id == id)
            .map(|m| format!("  pcc {:+.3}", m.pcc))
            .unwrap_or_default();
        out.push_str(&format!("  {id:<20} {coef:>10.4}{pcc}\n"));
    }
    out
}

fn cmd_ingest(globals: &GlobalArgs, args: &IngestArgs) -> Result<i32> {
    let ws = Workspace::open(globals)?;
    let export = ws.export_path(args.export.as_deref())?;
    let (history, stats) = ws.ingest(&export, args.format)?;

    let history_path = ws.artifact("bug_history.csv");
    report::write_text(&history_path, &report::bug_history_csv(&ws.timeline, &history))?;
    let mut assignment_log = String::from("key,release_id,source\n");
    for (key, release_id, source) in &stats.assignments {
        assignment_log.push_str(&format!("{key},{release_id},{source}\n"));
    }
    let log_path = ws.artifact("assignment_log.csv");
    report::write_text(&log_path, &assignment_log)?;

    if stats.bugs == 0 {
        log("warn", "event=ingest msg=\"export contained no bugs\"");
    }
    println!(
        "{} issues read, {} bugs ({} skipped by type)",
        stats.issues_seen, stats.bugs, stats.skipped_by_type
    );
    for r in &ws.timeline.releases {
        let c = history.get(r.id).copied().unwrap_or(ReleaseBugCount {
            release_id: r.id,
            labeled: 0,
            inferred: 0,
        });
        println!(
            "release {:>3} {:<12} total {:>5}  labeled {:>5}  inferred {:>5}",
            r.id,
            r.name,
            c.total(),
            c.labeled,
            c.inferred
        );
    }
    log(
        "info",
        &format!(
            "event=ingest grace_days={} wrote={} wrote={}",
            globals.grace_days,
            history_path.display(),
            log_path.display()
        ),
    );
    Ok(0)
}

fn cmd_extract(globals: &GlobalArgs) -> Result<i32> {
    let ws = Workspace::open(globals)?;
    let entry = ws.descriptor.project.repo.as_ref().ok_or_else(|| {
        Error::Usage("descriptor has no project.repo entry; nothing to extract from".into())
    })?;
    let repo_path = ProjectDescriptor::resolve(&ws.descriptor_path, entry);
    let repo = RepoHandle::open(&repo_path)?;
    let (outcomes, failures) = extract_all(&repo, &ws.timeline, &ws.catalog, Some(&ws.cache));
    for o in &outcomes {
        for w in &o.warnings {
            log("warn", &format!("event=extract release={} msg=\"{w}\"", o.vector.release_id));
        }
        log(
            "info",
            &format!(
                "event=extract release={} cache={}",
                o.vector.release_id,
                if o.cache_hit { "hit" } else { "miss" }
            ),
        );
    }
    let vectors: Vec<MetricVector> = outcomes.into_iter().map(|o| o.vector).collect();
    let path = ws.artifact("metrics.csv");
    report::write_text(&path, &report::metrics_csv(&ws.catalog, &vectors))?;
    println!(
        "{} release(s) extracted, {} metric(s) each -> {}",
        vectors.len(),
        ws.catalog.len(),
        path.display()
    );
    if failures.is_empty() {
        Ok(0)
    } else {
        for (id, e) in &failures {
            log("error", &format!("event=extract release={id} msg=\"{e}\""));
            println!("release {id}: FAILED ({e})");
        }
        Ok(crate::error::exit::EXTRACTION)
    }
}

fn cmd_correlate(globals: &GlobalArgs) -> Result<i32> {
    let ws = Workspace::open(globals)?;
    let ds = ws.dataset()?;
    let ids: Vec<String> = ws.catalog.entries().iter().map(|d| d.id.clone()).collect();
    let matrix = correlation_matrix(&ds.metrics, &ds.history, &ids)?;
    let selected = select_metrics(&matrix, &globals.policy());

    report::write_text(&ws.artifact("correlation.csv"), &report::correlation_csv(&matrix))?;
    report::write_text(
        &ws.artifact("selected_metrics.csv"),
        &report::selected_metrics_csv(&selected),
    )?;

    if selected.is_empty() {
        log(
            "warn",
            &format!(
                "event=correlate msg=\"no metric exceeded |pcc| {}\"",
                globals.min_pcc
            ),
        );
        println!("no metric exceeded |pcc| {}", globals.min_pcc);
    } else {
        println!("{} metric(s) selected:", selected.len());
        for m in &selected {
            println!("  {:<36} pcc {:+.3}", m.id, m.pcc);
        }
    }
    Ok(0)
}

fn cmd_fit(globals: &GlobalArgs, args: &FitArgs) -> Result<i32> {
    let ws = Workspace::open(globals)?;
    let ds = ws.dataset()?;
    let sub = match args.target {
        None => ds.clone(),
        Some(t) => training_prefix(&ds, t)?,
    };
    let selected = screen_metrics(&sub, &ws.catalog, &globals.policy())?;
    if selected.is_empty() {
        return Err(Error::Validation(format!(
            "no metric exceeded |pcc| {} on the training releases",
            globals.min_pcc
        )));
    }
    let ids = selected_ids(&selected);
    let rows = crate::stats::regression::rows_from_vectors(&sub.metrics, &ids)?;
    let y: Vec<f64> = (0..sub.len()).map(|i| sub.bugs_at(i) as f64).collect();
    let training: Vec<u32> = sub.timeline.releases.iter().map(|r| r.id).collect();
    let fit = crate::stats::regression::fit_linear(&ids, &rows, &y, &training, globals.fit_options())?;

    let path = ws.artifact("model.toml");
    report::write_text(&path, &report::model_toml(&fit.model)?)?;
    print!("{}", describe_model(&fit.model, &selected));
    println!("residual norm {:.4} over {} release(s) -> {}", fit.residual_norm, training.len(), path.display());
    Ok(0)
}

/// The dataset restricted to releases strictly before `target`.
fn training_prefix(ds: &ProjectDataset, target: u32) -> Result<ProjectDataset> {
    let pos = ds
        .timeline
        .position(target)
        .ok_or_else(|| Error::Validation(format!("unknown release id {target}")))?;
    if pos == 0 {
        return Err(Error::Validation(format!(
            "release {target} is the first release; no training data exists before it"
        )));
    }
    let timeline = Timeline {
        project: ds.timeline.project.clone(),
        releases: ds.timeline.releases[..pos].to_vec(),
        languages: ds.timeline.languages.clone(),
    };
    ProjectDataset::new(timeline, ds.metrics[..pos].to_vec(), ds.history.clone())
}

fn load_foreign(globals: &GlobalArgs, descriptor_path: &Path) -> Result<ProjectDataset> {
    let mut foreign = globals.clone();
    foreign.project = Some(descriptor_path.to_path_buf());
    foreign.source = None;
    Workspace::open(&foreign)?.dataset()
}

fn cmd_predict(globals: &GlobalArgs, args: &PredictArgs) -> Result<i32> {
    let ws = Workspace::open(globals)?;
    let ds = ws.dataset()?;
    let target = args.target;
    let pos = ds
        .timeline
        .position(target)
        .ok_or_else(|| Error::Validation(format!("unknown release id {target}")))?;

    let source_path = args.cross_from.as_deref().or(globals.source.as_deref());
    let (fit, selected) = match source_path {
        Some(path) => {
            let source = load_foreign(globals, path)?;
            let selected = screen_metrics(&source, &ws.catalog, &globals.policy())?;
            if selected.is_empty() {
                return Err(Error::Validation(format!(
                    "no metric exceeded |pcc| {} on the source project",
                    globals.min_pcc
                )));
            }
            let ids = selected_ids(&selected);
            let (fit, source_rows, target_rows) = pooled_fit(&source, &ds, target, &ids)?;
            log(
                "info",
                &format!(
                    "event=predict pool=cross source_rows={source_rows} target_rows={target_rows}"
                ),
            );
            (fit, selected)
        }
        None => {
            let prefix = training_prefix(&ds, target)?;
            let selected = screen_metrics(&prefix, &ws.catalog, &globals.policy())?;
            if selected.is_empty() {
                return Err(Error::Validation(format!(
                    "no metric exceeded |pcc| {} on releases before {target}",
                    globals.min_pcc
                )));
            }
            let ids = selected_ids(&selected);
            let fit = fit_for_target(&ds, &ids, target, globals.fit_options())?;
            (fit, selected)
        }
    };

    let vector = &ds.metrics[pos];
    let p = predict(&fit.model, vector)?;
    let release = &ds.timeline.releases[pos];
    println!(
        "release {} ({}): predicted {:.1} bugs{}",
        target,
        release.name,
        p.value,
        if p.clamped { " (clamped at 0)" } else { "" }
    );
    print!("{}", describe_model(&fit.model, &selected));
    let actual = ds.bugs_at(pos);
    if actual > 0 {
        let err = crate::stats::regression::prediction_error(p.value, actual)
            .expect("actual > 0");
        println!("actual {actual} -> error {err:.3}");
    } else {
        println!("actual count unknown or zero; error undefined");
    }
    Ok(0)
}

/// Parse a window list: "4", "1..9" (inclusive), or comma-joined mix.
fn parse_windows(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let bad = || Error::Usage(format!("unreadable window spec '{part}'"));
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            let w: usize = part.parse().map_err(|_| bad())?;
            if w == 0 {
                return Err(bad());
            }
            out.push(w);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Usage("window list is empty".into()));
    }
    Ok(out)
}

fn cmd_evaluate(globals: &GlobalArgs, experiment: Experiment) -> Result<i32> {
    if matches!(experiment, Experiment::Cross) && globals.source.is_none() {
        return Err(Error::Usage("evaluate cross requires --source <descriptor>".into()));
    }
    let ws = Workspace::open(globals)?;
    let ds = ws.dataset()?;
    let selected = screen_metrics(&ds, &ws.catalog, &globals.policy())?;
    if selected.is_empty() {
        return Err(Error::Validation(format!(
            "no metric exceeded |pcc| {}; nothing to evaluate",
            globals.min_pcc
        )));
    }
    let ids = selected_ids(&selected);
    log(
        "info",
        &format!("event=evaluate selected=\"{}\"", ids.join(",")),
    );

    match experiment {
        Experiment::Configs => {
            let rows = config_sweep(&ds, &ids)?;
            write_eval(&ws, "configs", "config", &rows)?;
            print!("{}", report::summary_table("config", &rows));
        }
        Experiment::Windows => {
            let windows = match &globals.windows {
                Some(text) => parse_windows(text)?,
                None => (1..ds.len()).collect(),
            };
            let rows = windowed_eval(&ds, &ids, &windows)?;
            report::write_text(&ws.artifact("eval_windows.csv"), &report::window_eval_csv(&rows))?;
            report::write_text(
                &ws.artifact("summary_windows.csv"),
                &report::window_summary_csv(&rows),
            )?;
            print!("{}", report::window_summary_table(&rows));
        }
        Experiment::Cross => {
            let source_path = globals
                .source
                .as_deref()
                .ok_or_else(|| Error::Usage("evaluate cross requires --source <descriptor>".into()))?;
            let source = load_foreign(globals, source_path)?;
            let rows = cross_project_eval(&source, &ds, &ids)?;
            write_eval(&ws, "cross", "pool", &rows)?;
            print!("{}", report::summary_table("pool", &rows));
        }
    }
    Ok(0)
}

fn write_eval(ws: &Workspace, experiment: &str, group: &str, rows: &[EvalRow]) -> Result<()> {
    let eval_path = ws.artifact(format!("eval_{experiment}.csv"));
    let summary_path = ws.artifact(format!("summary_{experiment}.csv"));
    report::write_text(&eval_path, &report::eval_csv(group, rows))?;
    report::write_text(&summary_path, &report::summary_csv(group, rows))?;
    log(
        "info",
        &format!(
            "event=evaluate wrote={} wrote={}",
            eval_path.display(),
            summary_path.display()
        ),
    );
    Ok(())
}

fn cmd_gen_synthetic(globals: &GlobalArgs, args: &GenSyntheticArgs) -> Result<i32> {
    let mut cfg = SynthConfig {
        name: args.name.clone(),
        releases: args.releases,
        seed: args.seed,
        noise: args.noise,
        regime_change_at: args.regime_at,
        ..SynthConfig::default()
    };
    if let Some(start) = args.start {
        cfg.start = start;
    }
    let dir = globals.out.join(&args.name);
    std::fs::create_dir_all(&dir)?;
    let project = generate(&dir, &cfg)?;
    println!("descriptor: {}", project.descriptor_path.display());
    println!("repository: {}", project.repo_dir.display());
    println!("bug export: {}", project.export_path.display());
    println!(
        "{} releases, seed {}, planted bug counts: {:?}",
        args.releases, args.seed, project.plan.planted_bugs
    );
    Ok(0)
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::IngestBugs(args) => cmd_ingest(&cli.globals, args),
        Command::ExtractMetrics => cmd_extract(&cli.globals),
        Command::Correlate => cmd_correlate(&cli.globals),
        Command::Fit(args) => cmd_fit(&cli.globals, args),
        Command::Predict(args) => cmd_predict(&cli.globals, args),
        Command::Evaluate(args) => cmd_evaluate(&cli.globals, args.experiment),
        Command::CrossEval => cmd_evaluate(&cli.globals, Experiment::Cross),
        Command::GenSynthetic(args) => cmd_gen_synthetic(&cli.globals, args),
    }
}

/// Entry point for the binary: parse, run, map errors to exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            log("error", &format!("code={} msg=\"{e}\"", e.exit_code()));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    #[test]
    fn window_lists_parse() {
        assert_eq!(parse_windows("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_windows("4").unwrap(), vec![4]);
        assert_eq!(parse_windows("2,4, 6").unwrap(), vec![2, 4, 6]);
        assert_eq!(parse_windows("3,1..2").unwrap(), vec![1, 2, 3]);
        assert!(parse_windows("0..3").is_err());
        assert!(parse_windows("9..2").is_err());
        assert!(parse_windows("x").is_err());
        assert!(parse_windows("").is_err());
    }

    #[test]
    fn flag_pairs_resolve_with_last_one_winning() {
        let cli = parse(&["bugcast", "--no-intercept", "--nonneg", "evaluate", "configs"]);
        assert_eq!(
            cli.globals.fit_options(),
            FitOptions { intercept: false, nonneg: true }
        );
        let cli = parse(&["bugcast", "--no-intercept", "--intercept", "fit"]);
        assert_eq!(cli.globals.fit_options(), FitOptions { intercept: true, nonneg: false });
        let cli = parse(&["bugcast", "fit"]);
        assert_eq!(cli.globals.fit_options(), FitOptions::default());
    }

    #[test]
    fn global_flags_may_follow_the_subcommand() {
        let cli = parse(&[
            "bugcast",
            "evaluate",
            "windows",
            "--windows",
            "1..9",
            "--project",
            "d.toml",
        ]);
        assert_eq!(cli.globals.windows.as_deref(), Some("1..9"));
        assert!(cli.globals.project.is_some());
    }

    #[test]
    fn missing_project_is_a_usage_error() {
        let cli = parse(&["bugcast", "correlate"]);
        let err = execute(&cli).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::USAGE);
    }

    #[test]
    fn cross_eval_without_source_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let project = crate::synth::generate(
            dir.path(),
            &SynthConfig { releases: 4, ..SynthConfig::default() },
        )
        .unwrap();
        let cli = parse(&[
            "bugcast",
            "--project",
            project.descriptor_path.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
            "evaluate",
            "cross",
        ]);
        let err = execute(&cli).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::USAGE);
    }

    #[test]
    fn out_equal_to_cache_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let project = crate::synth::generate(
            dir.path(),
            &SynthConfig { releases: 4, ..SynthConfig::default() },
        )
        .unwrap();
        let out = dir.path().join("out");
        let cli = parse(&[
            "bugcast",
            "--project",
            project.descriptor_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--cache",
            out.to_str().unwrap(),
            "correlate",
        ]);
        let err = execute(&cli).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::USAGE);
    }
}
