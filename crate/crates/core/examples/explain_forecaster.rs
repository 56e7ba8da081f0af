//! Explain a black-box forecaster with a surrogate: local, semi-local and
//! global attributions, plus surrogate fidelity.

use tsshap::explain::{explain_global, explain_local, explain_semi_local, fit_explainer, surrogate_fidelity, ExplainerConfig};
use tsshap::forecast::{Forecaster, MovingAverage, Naive, SeasonalNaive};
use tsshap::series::Horizon;
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let series = Seasonal::default().series()?;
    let horizon = Horizon::new(12)?;
    let config = ExplainerConfig::for_series(&series);
    let forecasters: Vec<Box<dyn Forecaster>> = vec![
        Box::new(Naive::default()),
        Box::new(SeasonalNaive::new(12)?),
        Box::new(MovingAverage::new(6)?),
    ];
    for f in &forecasters {
        let model = fit_explainer(&series, f.as_ref(), horizon, &config)?;
        let fid = surrogate_fidelity(&model, &series)?;
        println!("{} (surrogate MASE {:.3}, {} training rows)", f.name(), fid.mase, model.training.n_rows());
        let local = explain_local(&model, &series, 1)?;
        let semi = explain_semi_local(&model, &series, 1, 12)?;
        let global = explain_global(&model)?;
        for (label, e) in [("local h=1", &local), ("semi-local 1..12", &semi), ("global", &global)] {
            let top: Vec<String> = e.ranking().iter().take(3).map(|(n, v)| format!("{n}={v:.3}")).collect();
            println!("  {label:<17} {}", top.join("  "));
        }
    }
    Ok(())
}
