//! The whole flow in one place: generate a project with known ground truth,
//! mine its repository, reconstruct its bug history, screen metrics, sweep
//! the regression configurations, and write the same artifacts the CLI
//! produces.
//!
//!     cargo run --example full_pipeline

use bugcast::eval::{config_sweep, ProjectDataset};
use bugcast::ingest::{build_bug_history, parse_bug_export, ExportFormat, ParseOptions};
use bugcast::metrics::extract_all;
use bugcast::metrics::git::RepoHandle;
use bugcast::model::MetricCatalog;
use bugcast::report;
use bugcast::stats::{correlation_matrix, select_metrics, SelectionPolicy};
use bugcast::synth::{generate, SynthConfig};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    println!("generating an 8-release project under {:?}...", dir.path());
    let project = generate(dir.path(), &SynthConfig { releases: 8, seed: 7, ..SynthConfig::default() })?;

    let repo = RepoHandle::open(&project.repo_dir)?;
    let catalog = MetricCatalog::standard();
    let cache = dir.path().join("cache");
    let (outcomes, failures) = extract_all(&repo, &project.plan.timeline, &catalog, Some(&cache));
    anyhow::ensure!(failures.is_empty(), "extraction failed: {failures:?}");
    let metrics: Vec<_> = outcomes.into_iter().map(|o| o.vector).collect();
    println!("extracted {} metrics for {} releases", catalog.len(), metrics.len());

    let export = std::fs::read(&project.export_path)?;
    let parsed = parse_bug_export(&export, ExportFormat::Json, &ParseOptions::default())?;
    let history = build_bug_history(&parsed.bugs, &project.plan.timeline)?;
    println!(
        "reconstructed history: {} bugs across {} releases",
        history.total_bugs(),
        history.counts.len()
    );

    let ds = ProjectDataset::new(project.plan.timeline.clone(), metrics, history)?;
    let all_ids: Vec<String> = catalog.entries().iter().map(|d| d.id.clone()).collect();
    let matrix = correlation_matrix(&ds.metrics, &ds.history, &all_ids)?;
    let selected = select_metrics(&matrix, &SelectionPolicy::default());
    let ids: Vec<String> = selected.iter().map(|m| m.id.clone()).collect();
    println!("screened metrics: {ids:?}\n");

    let rows = config_sweep(&ds, &ids)?;
    print!("{}", report::summary_table("config", &rows));

    let out = dir.path().join("out");
    report::write_text(&out.join("bug_history.csv"), &report::bug_history_csv(&ds.timeline, &ds.history))?;
    report::write_text(&out.join("metrics.csv"), &report::metrics_csv(&catalog, &ds.metrics))?;
    report::write_text(&out.join("correlation.csv"), &report::correlation_csv(&matrix))?;
    report::write_text(&out.join("selected_metrics.csv"), &report::selected_metrics_csv(&selected))?;
    report::write_text(&out.join("eval_configs.csv"), &report::eval_csv("config", &rows))?;
    report::write_text(&out.join("summary_configs.csv"), &report::summary_csv("config", &rows))?;

    println!("\nartifacts:");
    for entry in std::fs::read_dir(&out)? {
        let entry = entry?;
        println!("  {} ({} bytes)", entry.file_name().to_string_lossy(), entry.metadata()?.len());
    }
    Ok(())
}
