//! Correlate every metric of an archived project snapshot against its bug
//! counts and apply the selection policy that feeds the regression step.
//!
//!     cargo run --example correlation_screen

use bugcast::baselines::{ProjectSnapshot, ONAP};
use bugcast::eval::ProjectDataset;
use bugcast::stats::{correlation_matrix, select_metrics, SelectionPolicy};

fn main() -> anyhow::Result<()> {
    let ds = ProjectDataset::new(ONAP.timeline(), ONAP.metric_vectors(), ONAP.bug_history())?;
    let ids = ProjectSnapshot::metric_ids();
    let matrix = correlation_matrix(&ds.metrics, &ds.history, &ids)?;

    println!("pearson correlation against bugs ({}):", ds.name);
    for (id, pcc) in matrix.against_bugs() {
        match pcc {
            Some(v) => println!("  {id:<28} {v:+.4}"),
            None => println!("  {id:<28} undefined (constant series)"),
        }
    }

    let policy = SelectionPolicy::default();
    println!(
        "\npolicy: |pcc| > {}, positive only: {}, at most {} metrics",
        policy.min_abs_pcc, policy.require_positive, policy.max_metrics
    );
    let selected = select_metrics(&matrix, &policy);
    if selected.is_empty() {
        println!("nothing cleared the bar");
    } else {
        for m in &selected {
            println!("  selected {:<28} {:+.4}", m.id, m.pcc);
        }
    }

    let loose = SelectionPolicy { min_abs_pcc: 0.5, ..policy };
    println!("\nwith the bar lowered to |pcc| > 0.5:");
    for m in select_metrics(&matrix, &loose) {
        println!("  selected {:<28} {:+.4}", m.id, m.pcc);
    }
    Ok(())
}
