//! Turn a series into the interpretable feature table the surrogate is
//! trained on.

use tsshap::features::{build_features, FeatureConfig, SeasonalLags, WindowStat};
use tsshap::series::Periodicity;
use tsshap::synthetic::Seasonal;

fn main() -> tsshap::Result<()> {
    let series = Seasonal {
        len: 36,
        ..Seasonal::default()
    }
    .series()?;
    let config = FeatureConfig {
        lags: vec![1, 2],
        seasonal_lags: Some(SeasonalLags { count: 1, period: 12 }),
        rolling_windows: vec![3],
        rolling_stats: vec![WindowStat::Mean],
        expanding: false,
        date_features: vec![tsshap::features::DateFeature::Month],
        ..FeatureConfig::empty("y")
    };
    let m = build_features(&series, &config)?;
    println!("{} rows x {} features", m.n_rows(), m.n_features());
    println!("{:>5} {}", "t", m.names.iter().map(|n| format!("{n:>14}")).collect::<String>());
    for (t, row) in m.row_index.iter().zip(&m.rows).take(5) {
        println!("{t:>5} {}", row.iter().map(|v| format!("{v:>14.3}")).collect::<String>());
    }
    println!("defaults for monthly data: {:?}", FeatureConfig::for_periodicity(Periodicity::Monthly).lags);
    Ok(())
}
