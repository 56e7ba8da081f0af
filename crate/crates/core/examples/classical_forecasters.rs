//! Fit the four classical baselines on a synthetic monthly series and
//! print their forecasts.

use tsshap::forecast::{Forecaster, MovingAverage, Naive, SeasonalNaive, SimpleExpSmoothing};
use tsshap::series::Horizon;
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let series = Seasonal::default().series()?;
    let horizon = Horizon::new(6)?;
    let mut models: Vec<Box<dyn Forecaster>> = vec![
        Box::new(Naive::default()),
        Box::new(SeasonalNaive::new(12)?),
        Box::new(MovingAverage::new(6)?),
        Box::new(SimpleExpSmoothing::new(0.3)?),
    ];
    let tail = &series.values()[series.len() - 6..];
    println!("last observations: {}", fmt(tail));
    for m in &mut models {
        m.fit(&series)?;
        let path = m.predict(horizon, None)?;
        println!("{:<22} {}", m.name(), fmt(&path));
    }
    Ok(())
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:7.2}")).collect::<Vec<_>>().join(" ")
}
