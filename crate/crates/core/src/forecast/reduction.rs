//! Forecasting reduced to one-step-ahead regression on interpretable
//! features, applied recursively.

use crate::error::{Error, Result};
use crate::features::{extend_with_prediction, FeatureConfig, FeatureSet};
use crate::gbt::{fit, GbtParams, TreeEnsemble};
use crate::series::{Horizon, Regressor, TimeSeries};

use super::Forecaster;

/// Output of [`recursive_forecast`]: the predictions and the exact
/// feature rows that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveForecast {
    pub values: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

/// Predict `y(T)`, append it, rebuild features on the extended series and
/// repeat for `horizon` steps.
pub fn recursive_forecast(
    features: &FeatureSet,
    model: &TreeEnsemble,
    history: &TimeSeries,
    horizon: Horizon,
) -> Result<RecursiveForecast> {
    let mut extended = history.clone();
    let mut values = Vec::with_capacity(horizon.get());
    let mut rows = Vec::with_capacity(horizon.get());
    for _ in 0..horizon.get() {
        let row = features.row(&extended, extended.len())?;
        let next = model.predict(&row)?;
        extended = extend_with_prediction(&extended, next)?;
        values.push(next);
        rows.push(row);
    }
    Ok(RecursiveForecast { values, rows })
}

/// Gradient-boosted trees on lag, window, calendar and regressor features.
/// Trained once; later windows only move the forecast origin.
#[derive(Clone, Debug)]
pub struct GbtReduction {
    config: FeatureConfig,
    features: FeatureSet,
    params: GbtParams,
    model: Option<TreeEnsemble>,
    history: Option<TimeSeries>,
}

impl GbtReduction {
    pub fn new(config: FeatureConfig, params: GbtParams) -> Result<Self> {
        params.validate()?;
        let features = FeatureSet::new(&config)?;
        Ok(GbtReduction {
            config,
            features,
            params,
            model: None,
            history: None,
        })
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn model(&self) -> Option<&TreeEnsemble> {
        self.model.as_ref()
    }
}

/// Fit a [`GbtReduction`] forecaster on `history`.
pub fn gbt_reduction_forecaster(
    history: &TimeSeries,
    config: FeatureConfig,
    params: GbtParams,
) -> Result<GbtReduction> {
    let mut f = GbtReduction::new(config, params)?;
    f.fit(history)?;
    Ok(f)
}

impl Forecaster for GbtReduction {
    fn name(&self) -> String {
        "GbtReduction".into()
    }

    fn fit(&mut self, history: &TimeSeries) -> Result<()> {
        let matrix = self.features.build(history)?;
        let y = history.values();
        let targets: Vec<f64> = matrix.row_index.iter().map(|&t| y[t]).collect();
        self.model = Some(fit(&matrix.rows, &matrix.names, &targets, &self.params)?);
        self.history = Some(history.clone());
        Ok(())
    }

    fn predict(
        &self,
        horizon: Horizon,
        future_regressors: Option<&[Regressor]>,
    ) -> Result<Vec<f64>> {
        let model = self.model.as_ref().ok_or(Error::NotFitted)?;
        let history = self.history.as_ref().ok_or(Error::NotFitted)?;
        let history = match future_regressors {
            Some(future) if !future.is_empty() => history.with_future_regressors(future)?,
            _ => history.clone(),
        };
        Ok(recursive_forecast(&self.features, model, &history, horizon)?.values)
    }

    fn supports_regressors(&self) -> bool {
        true
    }

    fn requires_refit_per_window(&self) -> bool {
        false
    }

    fn condition(&mut self, history: &TimeSeries) -> Result<()> {
        if self.model.is_none() {
            return self.fit(history);
        }
        if history.len() < self.features.lookback() {
            return Err(Error::InsufficientHistory {
                required: self.features.lookback(),
                available: history.len(),
            });
        }
        self.history = Some(history.clone());
        Ok(())
    }

    fn boxed_clone(&self) -> Box<dyn Forecaster> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SeasonalLags;
    use crate::series::Periodicity;
    use chrono::NaiveDate;

    fn start() -> chrono::NaiveDateTime {
        NaiveDate::from_ymd_opt(2020, 1, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn sinusoid_continuation() {
        let wave = |t: usize| (2.0 * std::f64::consts::PI * t as f64 / 7.0).sin();
        let y: Vec<f64> = (0..140).map(wave).collect();
        let series = TimeSeries::from_values(start(), Periodicity::Daily, y).unwrap();
        let mut cfg = FeatureConfig::empty("y");
        cfg.lags = vec![1];
        cfg.seasonal_lags = Some(SeasonalLags {
            count: 1,
            period: 7,
        });
        let f = gbt_reduction_forecaster(&series, cfg, GbtParams::default()).unwrap();
        let pred = f.predict(Horizon::new(7).unwrap(), None).unwrap();
        let truth: Vec<f64> = (140..147).map(wave).collect();
        assert!(pearson(&pred, &truth) > 0.9, "{pred:?}");
    }

    #[test]
    fn constant_series() {
        let series = TimeSeries::from_values(start(), Periodicity::Daily, vec![3.25; 40]).unwrap();
        let f = gbt_reduction_forecaster(&series, FeatureConfig::default(), GbtParams::default())
            .unwrap();
        for v in f.predict(Horizon::new(10).unwrap(), None).unwrap() {
            assert!((v - 3.25).abs() < 1e-6);
        }
    }

    #[test]
    fn short_history() {
        let series = TimeSeries::from_values(start(), Periodicity::Daily, vec![1.0, 2.0]).unwrap();
        let mut cfg = FeatureConfig::empty("y");
        cfg.lags = vec![5];
        assert!(matches!(
            GbtReduction::new(cfg, GbtParams::default())
                .unwrap()
                .fit(&series),
            Err(Error::InsufficientHistory { .. })
        ));
        let f = GbtReduction::new(FeatureConfig::default(), GbtParams::default()).unwrap();
        assert!(matches!(
            f.predict(Horizon::new(1).unwrap(), None),
            Err(Error::NotFitted)
        ));
    }

    #[test]
    fn condition_moves_origin_without_refit() {
        let y: Vec<f64> = (0..60).map(|t| (t % 5) as f64).collect();
        let series = TimeSeries::from_values(start(), Periodicity::Daily, y).unwrap();
        let mut f =
            gbt_reduction_forecaster(&series, FeatureConfig::default(), GbtParams::default())
                .unwrap();
        let before = f.model().unwrap().clone();
        f.condition(&series.truncate(40)).unwrap();
        assert_eq!(f.model().unwrap(), &before);
        let a = f.predict(Horizon::new(3).unwrap(), None).unwrap();
        let b = f.predict(Horizon::new(3).unwrap(), None).unwrap();
        assert_eq!(a, b);
    }
}
