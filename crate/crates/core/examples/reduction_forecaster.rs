//! A boosted-tree forecaster built by regressor reduction, forecasting
//! recursively from its own predictions.

use tsshap::features::FeatureConfig;
use tsshap::forecast::{Forecaster, GbtReduction};
use tsshap::gbt::GbtParams;
use tsshap::series::{Horizon, Periodicity};
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let full = Seasonal::default().series()?;
    let train = full.truncate(216);
    let mut model = GbtReduction::new(FeatureConfig::for_periodicity(Periodicity::Monthly), GbtParams::default())?;
    model.fit(&train)?;
    let path = model.predict(Horizon::new(24)?, None)?;
    let truth = &full.values()[216..];
    let mae = path.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum::<f64>() / truth.len() as f64;
    println!("24-step recursive forecast, MAE against held-out truth {mae:.3}");
    for (h, (f, t)) in path.iter().zip(truth).enumerate().step_by(4) {
        println!("  h={:2} forecast {f:7.2} truth {t:7.2}", h + 1);
    }
    Ok(())
}
