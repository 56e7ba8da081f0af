//! Faithfulness, sensitivity and complexity of explanations under
//! block-bootstrapped residual perturbations.

use tsshap::explain::ExplainerConfig;
use tsshap::forecast::{MovingAverage, Naive};
use tsshap::robustness::{block_bootstrap, evaluate, Pipeline, RobustnessConfig};
use tsshap::series::Horizon;
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let series = Seasonal {
        len: 120,
        ..Seasonal::default()
    }
    .series()?;
    let samples = block_bootstrap(&series, 12, 2, 0, 5)?;
    println!(
        "perturbed sample 0, first 8 points changed by {:?}",
        samples[0].series.values()[..8].iter().zip(series.values()).map(|(a, b)| format!("{:+.2}", a - b)).collect::<Vec<_>>()
    );

    let mut explainer = ExplainerConfig::for_series(&series);
    explainer.gbt.n_trees = 100;
    let config = RobustnessConfig {
        n_perturbations: 10,
        seed: 1,
        ..RobustnessConfig::default()
    };
    for forecaster in [Box::new(Naive::default()) as Box<dyn tsshap::forecast::Forecaster>, Box::new(MovingAverage::new(6)?)] {
        let name = forecaster.name();
        let pipeline = Pipeline::new(forecaster, Horizon::new(6)?, explainer.clone());
        println!("{name}");
        for r in evaluate(&pipeline, &series, &config)? {
            let show = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.3}"));
            println!(
                "  {:<10} faithfulness {:>9}  sensitivity {:.3}  complexity {:>9}",
                format!("{:?}", r.scope),
                show(r.faithfulness),
                r.sensitivity,
                show(r.complexity)
            );
        }
    }
    Ok(())
}
