//! Perturbation-based evaluation of explanations: faithfulness,
//! sensitivity and complexity.

mod bootstrap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bootstrap::{block_bootstrap, decompose, Decomposition, PerturbedSample};

use crate::error::{Error, Result};
use crate::explain::{explain_global, fit_explainer, locally_accurate, step_shap_with_output, ExplainerConfig, Scope};
use crate::forecast::{checked_predict, Forecaster};
use crate::series::{Horizon, Periodicity, TimeSeries};

/// Entropy of the normalised |phi| distribution.
pub fn complexity(phi: &[f64]) -> Result<f64> {
    let total: f64 = phi.iter().map(|p| p.abs()).sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::AllZeroImportance);
    }
    Ok(-phi
        .iter()
        .map(|p| p.abs() / total)
        .filter(|p| *p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>())
}

/// Pearson correlation between forecast changes and attribution changes.
pub fn faithfulness_from_deltas(delta_f: &[f64], delta_phi: &[f64]) -> Result<f64> {
    if delta_f.len() != delta_phi.len() {
        return Err(Error::LengthMismatch {
            what: "attribution deltas".into(),
            expected: delta_f.len(),
            actual: delta_phi.len(),
        });
    }
    if delta_f.len() < 2 {
        return Err(Error::invalid(
            "perturbations",
            "need at least 2 delta pairs",
        ));
    }
    let n = delta_f.len() as f64;
    let mf = delta_f.iter().sum::<f64>() / n;
    let mp = delta_phi.iter().sum::<f64>() / n;
    let (mut cov, mut vf, mut vp) = (0.0, 0.0, 0.0);
    for (f, p) in delta_f.iter().zip(delta_phi) {
        cov += (f - mf) * (p - mp);
        vf += (f - mf).powi(2);
        vp += (p - mp).powi(2);
    }
    if vf == 0.0 {
        return Err(Error::ZeroVariance("forecast deltas"));
    }
    if vp == 0.0 {
        return Err(Error::ZeroVariance("attribution deltas"));
    }
    Ok((cov / (vf * vp).sqrt()).clamp(-1.0, 1.0))
}

/// Mean Euclidean distance between an explanation and its perturbed
/// counterparts.
pub fn sensitivity_from(original: &[f64], perturbed: &[Vec<f64>]) -> Result<f64> {
    if perturbed.is_empty() {
        return Err(Error::invalid("perturbations", "need at least 1"));
    }
    Ok(perturbed
        .iter()
        .map(|p| euclidean(original, p))
        .sum::<f64>()
        / perturbed.len() as f64)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Forecaster plus explainer settings: everything refit on a perturbed
/// series.
#[derive(Clone)]
pub struct Pipeline {
    pub forecaster: Box<dyn Forecaster>,
    pub horizon: Horizon,
    pub explainer: ExplainerConfig,
    /// Inclusive step interval for semi-local explanations.
    pub interval: (usize, usize),
}

impl Pipeline {
    pub fn new(
        forecaster: Box<dyn Forecaster>,
        horizon: Horizon,
        explainer: ExplainerConfig,
    ) -> Self {
        Pipeline {
            forecaster,
            horizon,
            explainer,
            interval: (1, horizon.get()),
        }
    }

    /// Fit forecaster and surrogate on `series` and collect its forecast
    /// and explanations at every scope.
    pub fn run(&self, series: &TimeSeries) -> Result<PipelineRun> {
        let mut f = self.forecaster.boxed_clone();
        f.fit(series)?;
        let forecast = checked_predict(f.as_ref(), self.horizon, None)?;
        let model = fit_explainer(
            series,
            self.forecaster.as_ref(),
            self.horizon,
            &self.explainer,
        )?;
        let (shap, output) = step_shap_with_output(&model, series, self.horizon.get())?;
        for (h, (s, p)) in shap.iter().zip(&output).enumerate() {
            if !locally_accurate(s, *p) {
                return Err(Error::LocalAccuracy {
                    what: format!("step {}", h + 1),
                    sum: s.prediction(),
                    prediction: *p,
                });
            }
        }
        let local: Vec<Vec<f64>> = shap.into_iter().map(|s| s.phi).collect();
        let (a, b) = self.interval;
        if a == 0 || a > b || b > self.horizon.get() {
            return Err(Error::EmptyInterval { start: a, end: b });
        }
        let d = local.first().map_or(0, Vec::len);
        let semi_local = (0..d)
            .map(|j| local[a - 1..b].iter().map(|p| p[j]).sum::<f64>() / (b - a + 1) as f64)
            .collect();
        let global = explain_global(&model)?.values;
        Ok(PipelineRun {
            forecast,
            local,
            semi_local,
            global,
        })
    }
}

/// Outputs of one pipeline fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    /// Forecaster's H-step forecast from the end of the series.
    pub forecast: Vec<f64>,
    /// SHAP vector per forecast step.
    pub local: Vec<Vec<f64>>,
    pub semi_local: Vec<f64>,
    pub global: Vec<f64>,
}

impl PipelineRun {
    fn mean_forecast(&self, range: std::ops::Range<usize>) -> f64 {
        let n = range.len() as f64;
        self.forecast[range].iter().sum::<f64>() / n
    }
}

/// `(delta_f, delta_phi)` pairs at `scope`. Local scope contributes one
/// pair per perturbation and step; the aggregated scopes one pair per
/// perturbation, with the forecast change averaged over the interval
/// (semi-local) or the horizon (global).
pub fn delta_pairs(
    original: &PipelineRun,
    perturbed: &[PipelineRun],
    scope: Scope,
    interval: (usize, usize),
) -> (Vec<f64>, Vec<f64>) {
    let mut df = Vec::new();
    let mut dp = Vec::new();
    let sum_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).sum::<f64>();
    for p in perturbed {
        match scope {
            Scope::Local => {
                for h in 0..original.forecast.len() {
                    df.push(original.forecast[h] - p.forecast[h]);
                    dp.push(sum_diff(&original.local[h], &p.local[h]));
                }
            }
            Scope::SemiLocal => {
                let r = interval.0 - 1..interval.1;
                df.push(original.mean_forecast(r.clone()) - p.mean_forecast(r));
                dp.push(sum_diff(&original.semi_local, &p.semi_local));
            }
            Scope::Global => {
                let r = 0..original.forecast.len();
                df.push(original.mean_forecast(r.clone()) - p.mean_forecast(r));
                dp.push(sum_diff(&original.global, &p.global));
            }
        }
    }
    (df, dp)
}

/// Faithfulness over precomputed pipeline runs.
pub fn faithfulness_of(
    original: &PipelineRun,
    perturbed: &[PipelineRun],
    scope: Scope,
    interval: (usize, usize),
) -> Result<f64> {
    let (df, dp) = delta_pairs(original, perturbed, scope, interval);
    faithfulness_from_deltas(&df, &dp)
}

/// Sensitivity over precomputed pipeline runs. Local scope averages the
/// per-step distances over the horizon.
pub fn sensitivity_of(
    original: &PipelineRun,
    perturbed: &[PipelineRun],
    scope: Scope,
) -> Result<f64> {
    if perturbed.is_empty() {
        return Err(Error::invalid("perturbations", "need at least 1"));
    }
    match scope {
        Scope::Local => {
            let h = original.local.len() as f64;
            Ok(perturbed
                .iter()
                .map(|p| {
                    original
                        .local
                        .iter()
                        .zip(&p.local)
                        .map(|(a, b)| euclidean(a, b))
                        .sum::<f64>()
                        / h
                })
                .sum::<f64>()
                / perturbed.len() as f64)
        }
        Scope::SemiLocal => sensitivity_from(
            &original.semi_local,
            &perturbed
                .iter()
                .map(|p| p.semi_local.clone())
                .collect::<Vec<_>>(),
        ),
        Scope::Global => sensitivity_from(
            &original.global,
            &perturbed
                .iter()
                .map(|p| p.global.clone())
                .collect::<Vec<_>>(),
        ),
    }
}

/// Complexity of the original explanation; local scope averages over
/// steps with nonzero attributions.
pub fn complexity_of(run: &PipelineRun, scope: Scope) -> Result<f64> {
    match scope {
        Scope::Local => {
            let values: Vec<f64> = run
                .local
                .iter()
                .filter_map(|p| complexity(p).ok())
                .collect();
            if values.is_empty() {
                return Err(Error::AllZeroImportance);
            }
            Ok(values.iter().sum::<f64>() / values.len() as f64)
        }
        Scope::SemiLocal => complexity(&run.semi_local),
        Scope::Global => complexity(&run.global),
    }
}

/// Refit `pipeline` on every perturbed series, in parallel, in sample order.
pub fn run_perturbed(pipeline: &Pipeline, samples: &[PerturbedSample]) -> Result<Vec<PipelineRun>> {
    samples
        .par_iter()
        .map(|s| pipeline.run(&s.series))
        .collect()
}

/// Faithfulness of `pipeline` on `series` at `scope`.
pub fn faithfulness(
    pipeline: &Pipeline,
    series: &TimeSeries,
    perturbations: &[PerturbedSample],
    scope: Scope,
) -> Result<f64> {
    if perturbations.len() < 2 {
        return Err(Error::invalid("perturbations", "need at least 2"));
    }
    let original = pipeline.run(series)?;
    faithfulness_of(
        &original,
        &run_perturbed(pipeline, perturbations)?,
        scope,
        pipeline.interval,
    )
}

/// Sensitivity of `pipeline` on `series` at `scope`.
pub fn sensitivity(
    pipeline: &Pipeline,
    series: &TimeSeries,
    perturbations: &[PerturbedSample],
    scope: Scope,
) -> Result<f64> {
    let original = pipeline.run(series)?;
    sensitivity_of(&original, &run_perturbed(pipeline, perturbations)?, scope)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    pub enabled: bool,
    /// Moving-average order; defaults by periodicity.
    pub order: Option<usize>,
    /// Block length; defaults to max(N / 10, 2) for N residual points.
    pub block_length: Option<usize>,
    pub n_perturbations: usize,
    pub seed: u64,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig {
            enabled: true,
            order: None,
            block_length: None,
            n_perturbations: 20,
            seed: 0,
        }
    }
}

/// Default trend-cycle order: 7 for daily, 5 for weekly and monthly, 25
/// (about one day) for hourly series.
pub fn default_order(periodicity: Periodicity) -> usize {
    match periodicity {
        Periodicity::Hourly => 25,
        Periodicity::Daily => 7,
        Periodicity::Weekly | Periodicity::Monthly => 5,
    }
}

impl RobustnessConfig {
    pub fn resolve_order(&self, periodicity: Periodicity) -> usize {
        self.order.unwrap_or_else(|| default_order(periodicity))
    }

    pub fn resolve_block_length(&self, residual_len: usize) -> usize {
        self.block_length.unwrap_or((residual_len / 10).max(2))
    }

    pub fn samples(&self, series: &TimeSeries) -> Result<Vec<PerturbedSample>> {
        let order = self.resolve_order(series.periodicity());
        let residual_len = series.len().saturating_sub(order - 1);
        block_bootstrap(
            series,
            self.resolve_block_length(residual_len),
            self.n_perturbations,
            self.seed,
            order,
        )
    }
}

/// Metric values for one scope. Undefined values (constant deltas, all-zero
/// importance) are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub scope: Scope,
    pub faithfulness: Option<f64>,
    pub sensitivity: f64,
    pub complexity: Option<f64>,
    pub n_perturbations: usize,
    pub order: usize,
    pub block_length: usize,
}

/// Faithfulness, sensitivity and complexity at every scope, sharing one
/// set of perturbed refits.
pub fn evaluate(
    pipeline: &Pipeline,
    series: &TimeSeries,
    config: &RobustnessConfig,
) -> Result<Vec<MetricReport>> {
    let samples = config.samples(series)?;
    let original = pipeline.run(series)?;
    let perturbed = run_perturbed(pipeline, &samples)?;
    let order = config.resolve_order(series.periodicity());
    let block_length = samples.first().map_or(0, |s| s.block_length);
    [Scope::Local, Scope::SemiLocal, Scope::Global]
        .into_iter()
        .map(|scope| {
            let faithfulness =
                match faithfulness_of(&original, &perturbed, scope, pipeline.interval) {
                    Ok(v) => Some(v),
                    Err(Error::ZeroVariance(_)) => None,
                    Err(Error::InvalidParameter { .. }) if perturbed.len() < 2 => None,
                    Err(e) => return Err(e),
                };
            let complexity = match complexity_of(&original, scope) {
                Ok(v) => Some(v),
                Err(Error::AllZeroImportance) => None,
                Err(e) => return Err(e),
            };
            Ok(MetricReport {
                scope,
                faithfulness,
                sensitivity: sensitivity_of(&original, &perturbed, scope)?,
                complexity,
                n_perturbations: perturbed.len(),
                order,
                block_length,
            })
        })
        .collect()
}
