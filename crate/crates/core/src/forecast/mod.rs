//! Black-box forecaster interface and the built-in forecasters.

mod classical;
mod reduction;

use serde::{Deserialize, Serialize};

pub use classical::{
    moving_average_predict, naive_predict, seasonal_naive_predict, ses_predict, MovingAverage,
    Naive, SeasonalNaive, SimpleExpSmoothing,
};
pub use reduction::{
    gbt_reduction_forecaster, recursive_forecast, GbtReduction, RecursiveForecast,
};

use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::gbt::GbtParams;
use crate::series::{Horizon, Periodicity, Regressor, TimeSeries};

/// `values[h - 1]` is the forecast for `origin + h - 1` (0-based) made from
/// the first `origin` observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastPath {
    pub origin: usize,
    pub values: Vec<f64>,
}

impl ForecastPath {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }
}

/// A forecaster treated as a black box: only `fit` and `predict` are used.
pub trait Forecaster: Send + Sync {
    fn name(&self) -> String;

    fn fit(&mut self, history: &TimeSeries) -> Result<()>;

    /// Forecast `horizon` steps past the end of the last history seen by
    /// `fit` or `condition`.
    fn predict(
        &self,
        horizon: Horizon,
        future_regressors: Option<&[Regressor]>,
    ) -> Result<Vec<f64>>;

    fn supports_regressors(&self) -> bool {
        false
    }

    /// Classical models are refit on every backtest window. Forecasters
    /// returning false are fit once and then only re-anchored with
    /// [`Forecaster::condition`].
    fn requires_refit_per_window(&self) -> bool {
        true
    }

    /// Make `history` the starting point of the next `predict` without
    /// re-estimating any parameters.
    fn condition(&mut self, history: &TimeSeries) -> Result<()> {
        self.fit(history)
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster>;
}

impl Clone for Box<dyn Forecaster> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

/// Predict and check the output contract: exactly `H` finite values.
pub fn checked_predict(
    forecaster: &dyn Forecaster,
    horizon: Horizon,
    future_regressors: Option<&[Regressor]>,
) -> Result<Vec<f64>> {
    let values = forecaster.predict(horizon, future_regressors)?;
    if values.len() != horizon.get() {
        return Err(Error::BadForecast {
            expected: horizon.get(),
            actual: values.len(),
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index, value });
    }
    Ok(values)
}

/// Forecaster selection as written in a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForecasterSpec {
    Naive,
    SeasonalNaive {
        /// Defaults to the natural season of the series periodicity.
        #[serde(default)]
        season: Option<usize>,
    },
    MovingAverage {
        #[serde(default = "default_order")]
        order: usize,
    },
    Ses {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Gbt {
        #[serde(default)]
        features: Option<FeatureConfig>,
        #[serde(default)]
        params: GbtParams,
    },
}

fn default_order() -> usize {
    6
}

fn default_alpha() -> f64 {
    0.5
}

impl Default for ForecasterSpec {
    fn default() -> Self {
        ForecasterSpec::Naive
    }
}

impl std::hash::Hash for ForecasterSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            ForecasterSpec::Naive => {}
            ForecasterSpec::SeasonalNaive { season } => season.hash(state),
            ForecasterSpec::MovingAverage { order } => order.hash(state),
            ForecasterSpec::Ses { alpha } => alpha.to_bits().hash(state),
            ForecasterSpec::Gbt { features, params } => {
                features.hash(state);
                params.hash(state);
            }
        }
    }
}

impl ForecasterSpec {
    /// Instantiate an unfitted forecaster; `periodicity` fills the
    /// seasonal defaults.
    pub fn build(&self, periodicity: Periodicity) -> Result<Box<dyn Forecaster>> {
        Ok(match self {
            ForecasterSpec::Naive => Box::new(Naive::default()),
            ForecasterSpec::SeasonalNaive { season } => Box::new(SeasonalNaive::new(
                season.unwrap_or(periodicity.season_length()),
            )?),
            ForecasterSpec::MovingAverage { order } => Box::new(MovingAverage::new(*order)?),
            ForecasterSpec::Ses { alpha } => Box::new(SimpleExpSmoothing::new(*alpha)?),
            ForecasterSpec::Gbt { features, params } => {
                let features = features
                    .clone()
                    .unwrap_or_else(|| FeatureConfig::for_periodicity(periodicity));
                Box::new(GbtReduction::new(features, params.clone())?)
            }
        })
    }
}
