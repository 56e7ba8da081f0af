//! Partial dependence and SHAP dependence of the surrogate on a lag and a
//! calendar feature.

use tsshap::explain::{dependence_curves, fit_explainer, CurveScope, ExplainerConfig, DEFAULT_GRID_SIZE};
use tsshap::forecast::SeasonalNaive;
use tsshap::series::Horizon;
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let series = Seasonal::default().series()?;
    let model = fit_explainer(&series, &SeasonalNaive::new(12)?, Horizon::new(12)?, &ExplainerConfig::for_series(&series))?;
    for (feature, scope) in [("y(t-12)", CurveScope::Global), ("month", CurveScope::Local { step: 1 })] {
        let c = dependence_curves(&model, &series, feature, scope, DEFAULT_GRID_SIZE)?;
        println!("{feature} ({:?})", c.scope);
        for ((x, p), s) in c.grid.iter().zip(&c.pdp).zip(&c.sdp).step_by(c.grid.len().div_ceil(8)) {
            println!("  x={x:8.2}  pdp={p:8.3}  sdp={s:8.3}");
        }
    }
    Ok(())
}
