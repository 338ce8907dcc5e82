//! Plan a synthetic project and inspect the ground truth it promises: exact
//! per-release metric values, the bug law behind the issue export, and the
//! commit schedule that realizes both once written to disk.
//!
//!     cargo run --example synthetic_ground_truth

use bugcast::synth::{plan_project, SynthConfig};

fn main() -> anyhow::Result<()> {
    let cfg = SynthConfig { releases: 5, seed: 31, ..SynthConfig::default() };
    let plan = plan_project(&cfg)?;

    println!("timeline:");
    for r in &plan.timeline.releases {
        println!(
            "  release {} {:<4} start {} freeze {} ship {}",
            r.id, r.name, r.start, r.freeze, r.release_date
        );
    }

    println!("\nplanted metric truth (selection):");
    let shown = ["loc", "new_loc", "commits", "contributors", "new_modified_functions"];
    print!("{:>8}", "release");
    for id in shown {
        print!("{id:>24}");
    }
    println!();
    for v in &plan.truth {
        print!("{:>8}", v.release_id);
        for id in shown {
            print!("{:>24}", v.get(id).unwrap_or(f64::NAN));
        }
        println!();
    }

    println!("\nbug law output (noise applied, minimum one bug):");
    for (v, bugs) in plan.truth.iter().zip(&plan.planted_bugs) {
        println!(
            "  release {}: commits {:>3}, new loc {:>6} -> {} bugs",
            v.release_id,
            v.get("commits").unwrap_or(0.0),
            v.get("new_loc").unwrap_or(0.0),
            bugs
        );
    }

    let yaml_only = plan
        .commits
        .iter()
        .filter(|c| c.message.contains("config"))
        .count();
    println!(
        "\n{} commits scheduled ({} of them config-only noise), {} tracker issues",
        plan.commits.len(),
        yaml_only,
        plan.issues.len()
    );
    println!("first commit: {:?}", plan.commits.first().map(|c| &c.message));
    Ok(())
}
