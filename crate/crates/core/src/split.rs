//! Expanding-window train/test partitioning.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Horizon;

/// One backtest partition: train on `0..train_end`, test on
/// `train_end..train_end + H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandingWindowSplit {
    pub train_end: usize,
    pub test: Range<usize>,
}

/// Splitter settings. Unset fields resolve to defaults in
/// [`SplitterConfig::resolve`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitterConfig {
    pub initial_train: Option<usize>,
    pub step: Option<usize>,
}

impl SplitterConfig {
    /// Resolve `(initial_train, step)` for a series of length `len`.
    ///
    /// Defaults: `step = H`, `initial_train = max(2 * lookback, ceil(len / 2))`.
    pub fn resolve(&self, len: usize, horizon: Horizon, lookback: usize) -> (usize, usize) {
        let initial = self
            .initial_train
            .unwrap_or_else(|| (2 * lookback).max(len.div_ceil(2)).max(1));
        let step = self.step.unwrap_or(horizon.get());
        (initial, step)
    }
}

/// Expanding-window splits over a series of length `len`.
///
/// The first split trains on `initial_train` points; each later split
/// advances by `step`. A final split whose test window would run past
/// the end is dropped.
pub fn expanding_window_splits(
    len: usize,
    initial_train: usize,
    horizon: Horizon,
    step: usize,
) -> Result<Vec<ExpandingWindowSplit>> {
    let h = horizon.get();
    if initial_train == 0 {
        return Err(Error::invalid("initial_train", "must be at least 1"));
    }
    if step == 0 {
        return Err(Error::invalid("step", "must be at least 1"));
    }
    if initial_train + h > len {
        return Err(Error::InsufficientHistory {
            required: initial_train + h,
            available: len,
        });
    }
    Ok((initial_train..=len - h)
        .step_by(step)
        .map(|train_end| ExpandingWindowSplit {
            train_end,
            test: train_end..train_end + h,
        })
        .collect())
}
