//! Predict one project's bug counts from another project's history. For
//! each target release the source rows frozen before it are pooled with the
//! target rows already known at that point; a source-only variant shows what
//! transfer alone achieves.
//!
//!     cargo run --example cross_project_transfer

use bugcast::baselines::{ProjectSnapshot, ONAP, ONOS};
use bugcast::eval::{cross_project_eval, ProjectDataset};
use bugcast::stats::{correlation_matrix, select_metrics, SelectionPolicy};

fn main() -> anyhow::Result<()> {
    let source = ProjectDataset::new(ONOS.timeline(), ONOS.metric_vectors(), ONOS.bug_history())?;
    let target = ProjectDataset::new(ONAP.timeline(), ONAP.metric_vectors(), ONAP.bug_history())?;
    println!("source: {} ({} releases)", source.name, source.len());
    println!("target: {} ({} releases)\n", target.name, target.len());

    let ids: Vec<String> = {
        let all = ProjectSnapshot::metric_ids();
        let matrix = correlation_matrix(&source.metrics, &source.history, &all)?;
        select_metrics(&matrix, &SelectionPolicy::default())
            .into_iter()
            .map(|m| m.id)
            .collect()
    };
    println!("metrics screened on the source: {ids:?}\n");

    for row in cross_project_eval(&source, &target, &ids)? {
        println!("pool: {}", row.label);
        for r in &row.records {
            print!(
                "  release {:>2}: predicted {:>8.1}  actual {:>5}",
                r.release_id, r.predicted, r.actual
            );
            match r.error {
                Some(e) => println!("  error {e:.3}"),
                None => println!("  error undefined"),
            }
        }
        for (id, why) in &row.failures {
            println!("  release {id:>2}: no prediction ({why})");
        }
        if let Some(s) = &row.summary {
            println!("  median {:.3}  mean {:.3}  range [{:.3}, {:.3}]\n", s.median, s.mean, s.min, s.max);
        }
    }
    Ok(())
}
