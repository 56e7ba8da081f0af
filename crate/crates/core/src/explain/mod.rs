//! Surrogate explanations of a black-box forecaster.
//!
//! The forecaster is backtested, a tree ensemble is trained on
//! interpretable features to reproduce the backtested forecasts, and the
//! ensemble is explained with TreeSHAP.

mod curves;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use curves::{dependence_curves, CurveScope, CurveSet, CURVE_MAX_ROWS, DEFAULT_GRID_SIZE};

use crate::backtest::{
    backtest_splits, fidelity_metrics, run_backtest_on, BacktestResult, FidelityMetrics,
};
use crate::error::{Error, Result};
use crate::features::{extend_with_prediction, FeatureConfig, FeatureMatrix, FeatureSet};
use crate::forecast::{recursive_forecast, ForecastPath, Forecaster};
use crate::gbt::{fit, GbtParams, TreeEnsemble};
use crate::series::{Horizon, TimeSeries};
use crate::split::SplitterConfig;
use crate::treeshap::{expected_value, shap_rows, tree_shap, ShapVector};

/// Fewest training rows accepted for the surrogate.
pub const MIN_SURROGATE_ROWS: usize = 10;

/// Which backtested forecasts become surrogate training targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetMode {
    /// Only the one-step-ahead forecast of each backtest window.
    FirstStep,
    /// Every step of every backtest window. The step-`h` target is paired
    /// with features built on the window's history extended by the
    /// forecaster's own steps `1..h`, so the surrogate still learns a
    /// single one-step map.
    #[default]
    AllSteps,
}

#[derive(Clone, Debug, PartialEq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainerConfig {
    pub features: FeatureConfig,
    pub gbt: GbtParams,
    /// Backtest windows for the surrogate targets. Origins advance by one
    /// step unless configured otherwise, which gives one training row per
    /// covered index.
    pub splitter: SplitterConfig,
    pub target_mode: TargetMode,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        ExplainerConfig {
            features: FeatureConfig::default(),
            gbt: GbtParams::default(),
            splitter: SplitterConfig {
                initial_train: None,
                step: Some(1),
            },
            target_mode: TargetMode::AllSteps,
        }
    }
}

impl ExplainerConfig {
    /// Defaults with the seasonal lag matching the series periodicity.
    pub fn for_series(series: &TimeSeries) -> Self {
        ExplainerConfig {
            features: FeatureConfig::for_periodicity(series.periodicity()),
            ..ExplainerConfig::default()
        }
    }
}

/// A tree ensemble trained on backtested forecasts, never on observations.
#[derive(Clone, Debug)]
pub struct SurrogateModel {
    pub ensemble: TreeEnsemble,
    pub features: FeatureSet,
    pub horizon: Horizon,
    pub backtest: BacktestResult,
    /// Training rows; `row_index[i]` is the time index whose forecast is
    /// `targets[i]`.
    pub training: FeatureMatrix,
    pub targets: Vec<f64>,
    pub training_coverage: Range<usize>,
    pub forecaster_name: String,
}

impl SurrogateModel {
    pub fn feature_names(&self) -> &[String] {
        self.features.names()
    }

    pub fn base_value(&self) -> Result<f64> {
        expected_value(&self.ensemble)
    }
}

/// Backtest `forecaster` and train the surrogate on its forecasts.
pub fn fit_explainer(
    series: &TimeSeries,
    forecaster: &dyn Forecaster,
    horizon: Horizon,
    config: &ExplainerConfig,
) -> Result<SurrogateModel> {
    let features = FeatureSet::new(&config.features)?;
    let lookback = features.lookback();
    let (initial, step) = config.splitter.resolve(series.len(), horizon, lookback);
    if initial < lookback {
        return Err(Error::InsufficientHistory {
            required: lookback,
            available: initial,
        });
    }
    let splits = backtest_splits(series.len(), initial, horizon, step)?;
    let backtest = run_backtest_on(series, forecaster, horizon, splits)?;

    let mut rows = Vec::new();
    let mut row_index = Vec::new();
    let mut targets = Vec::new();
    for path in &backtest.paths {
        let steps = match config.target_mode {
            TargetMode::AllSteps => path.values.len(),
            TargetMode::FirstStep => 1,
        };
        let mut history = series.truncate(path.origin);
        for &target in &path.values[..steps] {
            rows.push(features.row(&history, history.len())?);
            row_index.push(history.len());
            targets.push(target);
            history = extend_with_prediction(&history, target)?;
        }
    }
    if rows.len() < MIN_SURROGATE_ROWS {
        return Err(Error::SurrogateUnderdetermined {
            rows: rows.len(),
            required: MIN_SURROGATE_ROWS,
        });
    }
    let ensemble = fit(&rows, features.names(), &targets, &config.gbt)?;
    let training = FeatureMatrix {
        names: features.names().to_vec(),
        rows,
        row_index,
    };
    Ok(SurrogateModel {
        ensemble,
        features,
        horizon,
        training_coverage: backtest.coverage.clone(),
        backtest,
        training,
        targets,
        forecaster_name: forecaster.name(),
    })
}

/// Surrogate forecast plus the feature rows behind each step.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateForecast {
    pub path: ForecastPath,
    pub rows: Vec<Vec<f64>>,
}

/// Recursive multi-step surrogate forecast from the end of `series`.
pub fn surrogate_forecast(
    model: &SurrogateModel,
    series: &TimeSeries,
    horizon: Horizon,
) -> Result<SurrogateForecast> {
    let out = recursive_forecast(&model.features, &model.ensemble, series, horizon)?;
    Ok(SurrogateForecast {
        path: ForecastPath {
            origin: series.len(),
            values: out.values,
        },
        rows: out.rows,
    })
}

/// Surrogate against forecaster on every backtest window, pooled over
/// windows and steps. MASE is scaled by the naive error of `series`.
pub fn surrogate_fidelity(model: &SurrogateModel, series: &TimeSeries) -> Result<FidelityMetrics> {
    let mut reference = Vec::new();
    let mut candidate = Vec::new();
    for path in &model.backtest.paths {
        let s = surrogate_forecast(model, &series.truncate(path.origin), model.horizon)?;
        reference.extend_from_slice(&path.values);
        candidate.extend_from_slice(&s.path.values);
    }
    fidelity_metrics(&reference, &candidate, series.values())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Local,
    SemiLocal,
    Global,
}

impl std::str::FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Scope::Local),
            "semilocal" | "semi-local" => Ok(Scope::SemiLocal),
            "global" => Ok(Scope::Global),
            other => Err(Error::ConfigInvalid(format!("unknown scope `{other}`"))),
        }
    }
}

/// What an explanation covers: one step, an inclusive step interval, or
/// the surrogate's whole training history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Span {
    Step { step: usize },
    Interval { start: usize, end: usize },
    History,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub scope: Scope,
    pub span: Span,
    pub feature_names: Vec<String>,
    /// Signed SHAP values (local, semi-local) or mean |phi| (global).
    pub values: Vec<f64>,
    pub base_value: f64,
    /// Surrogate output being explained; the mean over the interval for
    /// semi-local explanations. Absent for global importance.
    pub prediction: Option<f64>,
}

impl Explanation {
    /// Features by decreasing |value|, ties by name order.
    pub fn ranking(&self) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self
            .feature_names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
            .collect();
        out.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        out
    }

    pub fn top_feature(&self) -> Option<&str> {
        self.ranking().first().map(|(n, _)| *n)
    }

    pub fn value_of(&self, feature: &str) -> Option<f64> {
        self.feature_names
            .iter()
            .position(|n| n == feature)
            .map(|j| self.values[j])
    }
}

fn check_step(step: usize, horizon: Horizon) -> Result<()> {
    if step == 0 || step > horizon.get() {
        return Err(Error::HorizonOutOfRange {
            step,
            horizon: horizon.get(),
        });
    }
    Ok(())
}

/// SHAP vectors for steps `1..=steps` of the surrogate forecast, computed
/// on the rows the recursion actually used.
pub fn step_shap(
    model: &SurrogateModel,
    series: &TimeSeries,
    steps: usize,
) -> Result<Vec<ShapVector>> {
    Ok(step_shap_with_output(model, series, steps)?.0)
}

/// [`step_shap`] together with the surrogate's own output at each step.
pub fn step_shap_with_output(
    model: &SurrogateModel,
    series: &TimeSeries,
    steps: usize,
) -> Result<(Vec<ShapVector>, Vec<f64>)> {
    check_step(steps, model.horizon)?;
    let fc = surrogate_forecast(model, series, Horizon::new(steps)?)?;
    Ok((shap_rows(&model.ensemble, &fc.rows)?, fc.path.values))
}

/// Explanation of the surrogate forecast at a single step `h`.
pub fn explain_local(
    model: &SurrogateModel,
    series: &TimeSeries,
    step: usize,
) -> Result<Explanation> {
    check_step(step, model.horizon)?;
    let (shap, output) = step_shap_with_output(model, series, step)?;
    Ok(local_from(model, &shap[step - 1], output[step - 1], step))
}

fn local_from(model: &SurrogateModel, s: &ShapVector, output: f64, step: usize) -> Explanation {
    Explanation {
        scope: Scope::Local,
        span: Span::Step { step },
        feature_names: model.feature_names().to_vec(),
        values: s.phi.clone(),
        base_value: s.base_value,
        prediction: Some(output),
    }
}

/// Mean signed SHAP vector over steps `start..=end`.
pub fn explain_semi_local(
    model: &SurrogateModel,
    series: &TimeSeries,
    start: usize,
    end: usize,
) -> Result<Explanation> {
    if start == 0 || start > end {
        return Err(Error::EmptyInterval { start, end });
    }
    check_step(end, model.horizon)?;
    let (shap, output) = step_shap_with_output(model, series, end)?;
    Ok(semi_local_from(
        model,
        &shap[start - 1..end],
        &output[start - 1..end],
        start,
        end,
    ))
}

fn semi_local_from(
    model: &SurrogateModel,
    window: &[ShapVector],
    output: &[f64],
    start: usize,
    end: usize,
) -> Explanation {
    let n = window.len() as f64;
    let d = model.feature_names().len();
    let mut values = vec![0.0; d];
    for s in window {
        for (v, p) in values.iter_mut().zip(&s.phi) {
            *v += p;
        }
    }
    values.iter_mut().for_each(|v| *v /= n);
    let base_value = window[0].base_value;
    Explanation {
        scope: Scope::SemiLocal,
        span: Span::Interval { start, end },
        feature_names: model.feature_names().to_vec(),
        prediction: Some(output.iter().sum::<f64>() / n),
        values,
        base_value,
    }
}

/// Mean |phi| over every surrogate training row.
pub fn explain_global(model: &SurrogateModel) -> Result<Explanation> {
    let shap = shap_rows(&model.ensemble, &model.training.rows)?;
    let d = model.feature_names().len();
    let mut values = vec![0.0; d];
    for s in &shap {
        for (v, p) in values.iter_mut().zip(&s.phi) {
            *v += p.abs();
        }
    }
    let n = shap.len().max(1) as f64;
    values.iter_mut().for_each(|v| *v /= n);
    Ok(Explanation {
        scope: Scope::Global,
        span: Span::History,
        feature_names: model.feature_names().to_vec(),
        values,
        base_value: model.base_value()?,
        prediction: None,
    })
}

/// Explanation at `scope`: `step` is used for local scope and
/// `interval` for semi-local scope.
pub fn explain(
    model: &SurrogateModel,
    series: &TimeSeries,
    scope: Scope,
    step: usize,
    interval: (usize, usize),
) -> Result<Explanation> {
    match scope {
        Scope::Local => explain_local(model, series, step),
        Scope::SemiLocal => explain_semi_local(model, series, interval.0, interval.1),
        Scope::Global => explain_global(model),
    }
}

/// Local accuracy of a SHAP vector against the model output.
pub fn locally_accurate(shap: &ShapVector, prediction: f64) -> bool {
    (shap.prediction() - prediction).abs() <= 1e-6 * prediction.abs().max(1.0)
}

/// Single local SHAP vector for an arbitrary feature row.
pub fn explain_row(model: &SurrogateModel, row: &[f64]) -> Result<ShapVector> {
    tree_shap(&model.ensemble, row)
}

#[cfg(test)]
mod tests;
