//! Backtested historical forecasts over expanding windows, and fidelity
//! metrics between two forecast paths.

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{checked_predict, ForecastPath, Forecaster};
use crate::series::{Horizon, Regressor, TimeSeries};
use crate::split::{expanding_window_splits, ExpandingWindowSplit, SplitterConfig};

/// Forecasts from every split. `per_step[h - 1][t]` holds the step-`h`
/// forecast for index `t`, i.e. the value made from the first `t - h + 1`
/// observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub horizon: Horizon,
    pub splits: Vec<ExpandingWindowSplit>,
    pub paths: Vec<ForecastPath>,
    pub per_step: Vec<Vec<Option<f64>>>,
    pub coverage: Range<usize>,
    /// How many times `fit` was called.
    pub fit_calls: usize,
}

impl BacktestResult {
    /// Defined `(index, value)` pairs of the step-`h` series.
    pub fn step_series(&self, h: usize) -> Vec<(usize, f64)> {
        self.per_step[h - 1]
            .iter()
            .enumerate()
            .filter_map(|(t, v)| v.map(|v| (t, v)))
            .collect()
    }

    /// One row per covered index; blank cells where a step has no value.
    pub fn write_csv<W: Write>(&self, series: &TimeSeries, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string(), "timestamp".to_string()];
        header.extend((1..=self.horizon.get()).map(|h| format!("step{h}")));
        w.write_record(&header).map_err(csv_err)?;
        for t in self.coverage.clone() {
            let mut rec = vec![t.to_string(), series.timestamp_at(t).to_string()];
            rec.extend(
                self.per_step
                    .iter()
                    .map(|s| s[t].map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Backtest with splits resolved from `splitter` (no feature lookback).
pub fn run_backtest(
    series: &TimeSeries,
    forecaster: &dyn Forecaster,
    horizon: Horizon,
    splitter: &SplitterConfig,
) -> Result<BacktestResult> {
    let (initial, step) = splitter.resolve(series.len(), horizon, 0);
    let splits = backtest_splits(series.len(), initial, horizon, step)?;
    run_backtest_on(series, forecaster, horizon, splits)
}

/// Splits, with an exhausted series reported as [`Error::SplitExhausted`].
pub fn backtest_splits(
    len: usize,
    initial: usize,
    horizon: Horizon,
    step: usize,
) -> Result<Vec<ExpandingWindowSplit>> {
    match expanding_window_splits(len, initial, horizon, step) {
        Err(Error::InsufficientHistory { .. }) => Err(Error::SplitExhausted {
            len,
            horizon: horizon.get(),
        }),
        other => other,
    }
}

/// Backtest over explicit splits.
///
/// Forecasters that require refitting are fit on `0..train_end` of every
/// split, in parallel. The others are fit once on the whole series and
/// re-anchored at each split origin.
pub fn run_backtest_on(
    series: &TimeSeries,
    forecaster: &dyn Forecaster,
    horizon: Horizon,
    splits: Vec<ExpandingWindowSplit>,
) -> Result<BacktestResult> {
    if splits.is_empty() {
        return Err(Error::SplitExhausted {
            len: series.len(),
            horizon: horizon.get(),
        });
    }
    let future = |s: &ExpandingWindowSplit| -> Option<Vec<Regressor>> {
        if !forecaster.supports_regressors() || series.regressors().is_empty() {
            return None;
        }
        Some(
            series
                .regressors()
                .iter()
                .map(|r| {
                    let end = s.test.end.min(r.values.len());
                    Regressor::new(
                        r.name.clone(),
                        r.values[s.test.start.min(end)..end].to_vec(),
                    )
                })
                .collect(),
        )
    };

    let (paths, fit_calls) = if forecaster.requires_refit_per_window() {
        let paths = splits
            .par_iter()
            .map(|s| {
                let mut f = forecaster.boxed_clone();
                f.fit(&series.truncate(s.train_end))?;
                let values = checked_predict(f.as_ref(), horizon, future(s).as_deref())?;
                Ok(ForecastPath {
                    origin: s.train_end,
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (paths, splits.len())
    } else {
        let mut fitted = forecaster.boxed_clone();
        fitted.fit(series)?;
        let paths = splits
            .par_iter()
            .map(|s| {
                let mut f = fitted.boxed_clone();
                f.condition(&series.truncate(s.train_end))?;
                let values = checked_predict(f.as_ref(), horizon, future(s).as_deref())?;
                Ok(ForecastPath {
                    origin: s.train_end,
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (paths, 1)
    };

    let len = series.len();
    let mut per_step = vec![vec![None; len]; horizon.get()];
    for p in &paths {
        for (k, v) in p.values.iter().enumerate() {
            per_step[k][p.origin + k] = Some(*v);
        }
    }
    let coverage = splits[0].test.start..splits.last().map_or(0, |s| s.test.end);
    Ok(BacktestResult {
        horizon,
        splits,
        paths,
        per_step,
        coverage,
        fit_calls,
    })
}

/// Agreement between a reference path (the forecaster) and a candidate
/// (the surrogate).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub mape: f64,
    pub mase: f64,
}

/// MAE, RMSE, MAPE and MASE of `candidate` against `reference`. MAPE
/// skips zero reference values. MASE divides by the in-sample one-step
/// naive MAE of `insample`.
pub fn fidelity_metrics(
    reference: &[f64],
    candidate: &[f64],
    insample: &[f64],
) -> Result<FidelityMetrics> {
    if reference.is_empty() {
        return Err(Error::EmptyData);
    }
    if reference.len() != candidate.len() {
        return Err(Error::LengthMismatch {
            what: "surrogate path".into(),
            expected: reference.len(),
            actual: candidate.len(),
        });
    }
    if insample.len() < 2 {
        return Err(Error::InsufficientHistory {
            required: 2,
            available: insample.len(),
        });
    }
    let n = reference.len() as f64;
    let mae = reference
        .iter()
        .zip(candidate)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / n;
    let rmse = (reference
        .iter()
        .zip(candidate)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let (ape, nz) = reference
        .iter()
        .zip(candidate)
        .filter(|(a, _)| **a != 0.0)
        .fold((0.0, 0usize), |(s, k), (a, b)| {
            (s + ((a - b) / a).abs(), k + 1)
        });
    if nz == 0 {
        return Err(Error::AllReferenceZero);
    }
    let scale = insample
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .sum::<f64>()
        / (insample.len() - 1) as f64;
    if scale == 0.0 {
        return Err(Error::ZeroVariance("in-sample naive error"));
    }
    Ok(FidelityMetrics {
        mae,
        rmse,
        mape: ape / nz as f64,
        mase: mae / scale,
    })
}
