//! Partial dependence (PDP) and SHAP dependence (SDP) curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureKind;
use crate::series::{Horizon, TimeSeries};
use crate::treeshap::shap_rows;

use super::{check_step, surrogate_forecast, Scope, Span, SurrogateModel};

pub const DEFAULT_GRID_SIZE: usize = 20;

/// Global curves average over at most this many training rows.
pub const CURVE_MAX_ROWS: usize = 2000;

/// Which rows the curve is computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "lowercase")]
pub enum CurveScope {
    /// The row behind forecast step `step`.
    Local { step: usize },
    /// Mean over the rows behind steps `start..=end`.
    SemiLocal { start: usize, end: usize },
    /// Mean over all surrogate training rows.
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub feature: String,
    pub scope: Scope,
    pub span: Span,
    pub grid: Vec<f64>,
    /// Surrogate output with the feature set to each grid value.
    pub pdp: Vec<f64>,
    /// SHAP value of the feature at each grid value.
    pub sdp: Vec<f64>,
}

/// PDP and SDP for `feature` over its observed training range.
///
/// Continuous features get `grid_size` equally spaced points; ordinal
/// features use their distinct observed values.
pub fn dependence_curves(
    model: &SurrogateModel,
    series: &TimeSeries,
    feature: &str,
    scope: CurveScope,
    grid_size: usize,
) -> Result<CurveSet> {
    let j = model
        .features
        .index_of(feature)
        .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
    if grid_size < 2 {
        return Err(Error::invalid("grid_size", "must be at least 2"));
    }
    let column: Vec<f64> = model.training.rows.iter().map(|r| r[j]).collect();
    let grid = grid_for(&column, model.features.kinds()[j], grid_size)
        .ok_or_else(|| Error::DegenerateRange(feature.to_string()))?;

    let (rows, out_scope, span) = match scope {
        CurveScope::Local { step } => {
            check_step(step, model.horizon)?;
            let fc = surrogate_forecast(model, series, Horizon::new(step)?)?;
            (
                vec![fc.rows[step - 1].clone()],
                Scope::Local,
                Span::Step { step },
            )
        }
        CurveScope::SemiLocal { start, end } => {
            if start == 0 || start > end {
                return Err(Error::EmptyInterval { start, end });
            }
            check_step(end, model.horizon)?;
            let fc = surrogate_forecast(model, series, Horizon::new(end)?)?;
            (
                fc.rows[start - 1..end].to_vec(),
                Scope::SemiLocal,
                Span::Interval { start, end },
            )
        }
        CurveScope::Global => (strided(&model.training.rows, CURVE_MAX_ROWS), Scope::Global, Span::History),
    };

    let n = rows.len() as f64;
    let mut pdp = Vec::with_capacity(grid.len());
    let mut sdp = Vec::with_capacity(grid.len());
    for &g in &grid {
        let probes: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                let mut x = row.clone();
                x[j] = g;
                x
            })
            .collect();
        let mut p = 0.0;
        for x in &probes {
            p += model.ensemble.predict(x)?;
        }
        let s: f64 = shap_rows(&model.ensemble, &probes)?.iter().map(|v| v.phi[j]).sum();
        pdp.push(p / n);
        sdp.push(s / n);
    }
    Ok(CurveSet {
        feature: feature.to_string(),
        scope: out_scope,
        span,
        grid,
        pdp,
        sdp,
    })
}

/// Every k-th row, keeping at most `max` rows spread evenly in time.
fn strided(rows: &[Vec<f64>], max: usize) -> Vec<Vec<f64>> {
    let k = rows.len().div_ceil(max).max(1);
    rows.iter().step_by(k).cloned().collect()
}

fn grid_for(column: &[f64], kind: FeatureKind, size: usize) -> Option<Vec<f64>> {
    let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return None;
    }
    Some(match kind {
        FeatureKind::Ordinal => {
            let mut v = column.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
        FeatureKind::Continuous => {
            let step = (hi - lo) / (size - 1) as f64;
            (0..size)
                .map(|i| {
                    if i == size - 1 {
                        hi
                    } else {
                        lo + step * i as f64
                    }
                })
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = grid_for(&[0.0, 1.0, 0.5], FeatureKind::Continuous, 5).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = grid_for(&[3.0, 1.0, 3.0, 2.0], FeatureKind::Ordinal, 20).unwrap();
        assert_eq!(g, vec![1.0, 2.0, 3.0]);
        assert!(grid_for(&[2.0, 2.0], FeatureKind::Continuous, 5).is_none());
    }
}
