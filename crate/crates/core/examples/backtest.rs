//! Expanding-window backtest of a seasonal naive forecaster, with the
//! per-step forecasts written to CSV and scored against the truth.

use tsshap::backtest::{fidelity_metrics, run_backtest};
use tsshap::forecast::SeasonalNaive;
use tsshap::series::Horizon;
use tsshap::split::SplitterConfig;
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let series = Seasonal::default().series()?;
    let horizon = Horizon::new(12)?;
    let bt = run_backtest(&series, &SeasonalNaive::new(12)?, horizon, &SplitterConfig::default())?;
    println!("{} splits, covered indices {:?}, {} fits", bt.splits.len(), bt.coverage, bt.fit_calls);

    for h in [1, 6, 12] {
        let (truth, fc): (Vec<f64>, Vec<f64>) =
            bt.step_series(h).into_iter().map(|(i, v)| (series.values()[i], v)).unzip();
        let m = fidelity_metrics(&truth, &fc, series.values())?;
        println!("step {h:2}: MAE {:.3} MASE {:.3} over {} points", m.mae, m.mase, truth.len());
    }

    let path = std::env::temp_dir().join("tsshap-backtest.csv");
    bt.write_csv(&series, std::fs::File::create(&path)?)?;
    println!("per-step forecasts written to {}", path.display());
    Ok(())
}
