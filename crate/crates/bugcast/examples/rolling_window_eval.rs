//! Compare rolling training windows on a synthetic project whose bug law
//! changes partway through the timeline. Small windows forget the stale
//! regime faster; the full history keeps averaging it in.
//!
//!     cargo run --example rolling_window_eval

use bugcast::eval::{windowed_eval, ProjectDataset};
use bugcast::ingest::{build_bug_history, parse_bug_export, ExportFormat, ParseOptions};
use bugcast::metrics::extract_all;
use bugcast::metrics::git::RepoHandle;
use bugcast::model::MetricCatalog;
use bugcast::report::window_summary_table;
use bugcast::stats::{correlation_matrix, select_metrics, SelectionPolicy};
use bugcast::synth::{generate, SynthConfig};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    println!("generating a 10-release project with a law shift at release 6...");
    let project = generate(
        dir.path(),
        &SynthConfig {
            releases: 10,
            seed: 99,
            regime_change_at: Some(6),
            ..SynthConfig::default()
        },
    )?;

    let repo = RepoHandle::open(&project.repo_dir)?;
    let catalog = MetricCatalog::standard();
    let (outcomes, failures) = extract_all(&repo, &project.plan.timeline, &catalog, None);
    anyhow::ensure!(failures.is_empty(), "extraction failed: {failures:?}");
    let metrics = outcomes.into_iter().map(|o| o.vector).collect();

    let export = std::fs::read(&project.export_path)?;
    let parsed = parse_bug_export(&export, ExportFormat::Json, &ParseOptions::default())?;
    let history = build_bug_history(&parsed.bugs, &project.plan.timeline)?;
    let ds = ProjectDataset::new(project.plan.timeline.clone(), metrics, history)?;

    let ids: Vec<String> = {
        let all: Vec<String> = catalog.entries().iter().map(|d| d.id.clone()).collect();
        let matrix = correlation_matrix(&ds.metrics, &ds.history, &all)?;
        select_metrics(&matrix, &SelectionPolicy::default())
            .into_iter()
            .map(|m| m.id)
            .collect()
    };
    println!("screened metrics: {ids:?}\n");

    let windows: Vec<usize> = (1..=8).collect();
    let rows = windowed_eval(&ds, &ids, &windows)?;
    print!("{}", window_summary_table(&rows));

    println!("\nper-release error after the shift, short vs long windows:");
    let errors_for = |w: usize| -> std::collections::BTreeMap<u32, f64> {
        rows.iter()
            .find(|r| r.window == w)
            .map(|r| {
                r.row
                    .records
                    .iter()
                    .filter_map(|p| p.error.map(|e| (p.release_id, e)))
                    .collect()
            })
            .unwrap_or_default()
    };
    let (short, long) = (errors_for(3), errors_for(8));
    for (release, e) in short.iter().filter(|(r, _)| **r >= 6) {
        match long.get(release) {
            Some(le) => println!("  release {release:>2}: w=3 {e:>7.3}   w=8 {le:>7.3}"),
            None => println!("  release {release:>2}: w=3 {e:>7.3}   w=8 (not enough history)"),
        }
    }
    Ok(())
}
