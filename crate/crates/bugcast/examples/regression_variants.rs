//! Fit the four regression configurations on an archived project and show
//! how intercept and sign constraints change the model and its prediction
//! for the final release.
//!
//!     cargo run --example regression_variants

use bugcast::baselines::ONAP;
use bugcast::eval::{fit_for_target, ProjectDataset, RegressionConfig};
use bugcast::stats::regression::{predict, prediction_error};
use bugcast::stats::{correlation_matrix, select_metrics, SelectionPolicy};

fn main() -> anyhow::Result<()> {
    let ds = ProjectDataset::new(ONAP.timeline(), ONAP.metric_vectors(), ONAP.bug_history())?;
    let ids_all = bugcast::baselines::ProjectSnapshot::metric_ids();
    let matrix = correlation_matrix(&ds.metrics, &ds.history, &ids_all)?;
    let ids: Vec<String> = select_metrics(&matrix, &SelectionPolicy::default())
        .into_iter()
        .map(|m| m.id)
        .collect();
    println!("selected metrics: {ids:?}");

    let target = ds.timeline.releases.last().unwrap().id;
    let pos = ds.timeline.position(target).unwrap();
    let actual = ds.bugs_at(pos);
    println!("predicting release {target} (actual bugs: {actual})\n");

    for config in RegressionConfig::ALL {
        let fit = fit_for_target(&ds, &ids, target, config.options())?;
        let p = predict(&fit.model, &ds.metrics[pos])?;
        print!(
            "{:<10} residual norm {:>10.2}  predicted {:>7.1}",
            config.label(),
            fit.residual_norm,
            p.value
        );
        if p.clamped {
            print!(" (clamped)");
        }
        match prediction_error(p.value, actual) {
            Some(e) => println!("  error {:.3}", e),
            None => println!("  error undefined"),
        }
        if fit.model.options.intercept {
            println!("  intercept {:+.3}", fit.model.intercept);
        }
        for (id, c) in fit.model.metric_ids.iter().zip(&fit.model.coefficients) {
            println!("  {id:<28} {c:+.5}");
        }
        println!();
    }
    Ok(())
}
