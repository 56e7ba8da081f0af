//! Drive a full run from a TOML config: report.json plus SVG plots.
//!
//! `cargo run --example run_config -- configs/us-unemployment.toml`

use std::path::PathBuf;

use tsshap::cli::{run, RunConfig};

fn main() -> tsshap::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/us-unemployment.toml")
    });
    let mut config = RunConfig::load(&path)?;
    config.robustness.enabled = false;
    let report = run(&config)?;
    println!("{} / {} -> {}", report.metadata.dataset, report.metadata.forecaster, config.output.display());
    if let Some(f) = &report.fidelity {
        println!("fidelity: MAE {:.4}  RMSE {:.4}  MAPE {:.4}  MASE {:.4}", f.mae, f.rmse, f.mape, f.mase);
    }
    for e in &report.explanations {
        println!("{:?}: top feature {}", e.scope, e.top_feature().unwrap_or("-"));
    }
    println!("plots: {}", report.plots.join(", "));
    Ok(())
}
