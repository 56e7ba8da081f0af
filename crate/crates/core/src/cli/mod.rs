//! Config-driven runs: ingest a CSV, explain a forecaster, write a JSON
//! report and SVG plots.

pub mod datasets;
mod svg;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use svg::{render_svg, Line, PlotSpec};

use crate::backtest::FidelityMetrics;
use crate::error::{Error, Result};
use crate::explain::{
    dependence_curves, explain_global, fit_explainer, locally_accurate, step_shap_with_output,
    surrogate_fidelity, surrogate_forecast, CurveScope, CurveSet, ExplainerConfig, Explanation,
    Scope, Span, SurrogateModel, TargetMode, DEFAULT_GRID_SIZE,
};
use crate::features::{FeatureConfig, FeatureSet};
use crate::forecast::{checked_predict, ForecasterSpec};
use crate::gbt::GbtParams;
use crate::robustness::{evaluate, MetricReport, Pipeline, RobustnessConfig};
use crate::series::{read_csv, Horizon, MissingPolicy, Periodicity, TimeSeries};
use crate::split::SplitterConfig;
use crate::treeshap::ShapVector;

/// What to explain and plot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainRequest {
    pub scopes: Vec<Scope>,
    /// Forecast step for local explanations.
    pub step: usize,
    /// Inclusive step interval for semi-local explanations; the whole
    /// horizon when unset.
    pub interval: Option<(usize, usize)>,
    /// Features to draw PDP/SDP curves for.
    pub pdp: Vec<String>,
    pub curve_scope: Scope,
    pub grid_size: usize,
}

impl Default for ExplainRequest {
    fn default() -> Self {
        ExplainRequest {
            scopes: vec![Scope::Local, Scope::SemiLocal, Scope::Global],
            step: 1,
            interval: None,
            pdp: Vec::new(),
            curve_scope: Scope::Global,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// A run configuration, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// CSV with `timestamp,value[,regressor..]`; relative paths resolve
    /// against the config file.
    pub input: PathBuf,
    /// Label for the report; the input file stem when unset.
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub periodicity: Option<Periodicity>,
    #[serde(default)]
    pub missing: MissingPolicy,
    #[serde(default)]
    pub forecaster: ForecasterSpec,
    /// Defaults to 10% of the series length.
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Surrogate features; defaults depend on the periodicity.
    #[serde(default)]
    pub features: Option<FeatureConfig>,
    #[serde(default)]
    pub gbt: GbtParams,
    #[serde(default)]
    pub splitter: Option<SplitterConfig>,
    #[serde(default)]
    pub target_mode: TargetMode,
    #[serde(default)]
    pub explain: ExplainRequest,
    #[serde(default)]
    pub robustness: RobustnessConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Overrides both the GBT and the bootstrap seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_output() -> PathBuf {
    PathBuf::from("tsshap-out")
}

fn yes() -> bool {
    true
}

impl RunConfig {
    /// Minimal config around `input` with every default.
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            dataset: None,
            periodicity: None,
            missing: MissingPolicy::default(),
            forecaster: ForecasterSpec::default(),
            horizon: None,
            features: None,
            gbt: GbtParams::default(),
            splitter: None,
            target_mode: TargetMode::default(),
            explain: ExplainRequest::default(),
            robustness: RobustnessConfig::default(),
            output: default_output(),
            seed: None,
            plots: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Read a config file, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.input);
        resolve(&mut cfg.output);
        if let Some(h) = cfg.features.as_mut().and_then(|f| f.holidays.as_mut()) {
            resolve(&mut h.calendar);
        }
        Ok(cfg)
    }

    /// Checks that need no data.
    pub fn validate(&self) -> Result<()> {
        let invalid = |e: Error| Error::ConfigInvalid(e.to_string());
        if self.horizon == Some(0) {
            return Err(Error::ConfigInvalid("horizon must be at least 1".into()));
        }
        self.gbt.validate().map_err(invalid)?;
        let req = &self.explain;
        if req.step == 0 {
            return Err(Error::ConfigInvalid(
                "explain.step must be at least 1".into(),
            ));
        }
        if let Some((a, b)) = req.interval {
            if a == 0 || a > b {
                return Err(Error::ConfigInvalid(format!(
                    "explain.interval {a}..={b} is empty"
                )));
            }
        }
        if !req.pdp.is_empty() && req.grid_size < 2 {
            return Err(Error::ConfigInvalid(
                "explain.grid_size must be at least 2".into(),
            ));
        }
        for (i, f) in req.pdp.iter().enumerate() {
            if req.pdp[..i].contains(f) {
                return Err(Error::ConfigInvalid(format!(
                    "explain.pdp lists `{f}` twice"
                )));
            }
        }
        let rb = &self.robustness;
        if rb.enabled {
            if rb.n_perturbations == 0 {
                return Err(Error::ConfigInvalid(
                    "robustness.n_perturbations must be at least 1".into(),
                ));
            }
            if rb.order.is_some_and(|m| m % 2 == 0) {
                return Err(Error::ConfigInvalid("robustness.order must be odd".into()));
            }
            if rb.block_length == Some(0) {
                return Err(Error::ConfigInvalid(
                    "robustness.block_length must be at least 1".into(),
                ));
            }
        }
        if let Some(f) = &self.features {
            FeatureSet::new(f)?;
        }
        Ok(())
    }

    /// Fill every periodicity- and length-dependent default, and apply the
    /// seed override.
    pub fn resolve(&self, series: &TimeSeries) -> Result<ResolvedConfig> {
        let periodicity = series.periodicity();
        let horizon = self
            .horizon
            .unwrap_or_else(|| ((series.len() as f64 * 0.1).round() as usize).max(1));
        let features = self
            .features
            .clone()
            .unwrap_or_else(|| FeatureConfig::for_periodicity(periodicity));
        let feature_set = FeatureSet::new(&features)?;
        let mut gbt = self.gbt.clone();
        let mut robustness = self.robustness.clone();
        if let Some(seed) = self.seed {
            gbt.seed = seed;
            robustness.seed = seed;
        }
        let mut explain = self.explain.clone();
        let interval = explain.interval.unwrap_or((1, horizon));
        explain.interval = Some(interval);
        if explain.step > horizon {
            return Err(Error::ConfigInvalid(format!(
                "explain.step {} exceeds horizon {horizon}",
                explain.step
            )));
        }
        if interval.1 > horizon {
            return Err(Error::ConfigInvalid(format!(
                "explain.interval ends past horizon {horizon}"
            )));
        }
        for f in &explain.pdp {
            if feature_set.index_of(f).is_none() {
                return Err(Error::ConfigInvalid(format!(
                    "explain.pdp feature `{f}` is not built (available: {})",
                    feature_set.names().join(", ")
                )));
            }
        }
        if robustness.enabled {
            robustness.order = Some(robustness.resolve_order(periodicity));
        }
        let splitter = self
            .splitter
            .clone()
            .unwrap_or_else(|| ExplainerConfig::default().splitter);
        self.forecaster
            .build(periodicity)
            .map_err(|e| Error::ConfigInvalid(format!("forecaster: {e}")))?;
        Ok(ResolvedConfig {
            input: self.input.display().to_string(),
            dataset: self.dataset.clone().unwrap_or_else(|| {
                self.input
                    .file_stem()
                    .map_or("series".into(), |s| s.to_string_lossy().into_owned())
            }),
            periodicity,
            missing: self.missing,
            forecaster: self.forecaster.clone(),
            horizon,
            explainer: ExplainerConfig {
                features,
                gbt,
                splitter,
                target_mode: self.target_mode,
            },
            explain,
            robustness,
        })
    }
}

/// A config with every default filled in. Its hash identifies the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub input: String,
    pub dataset: String,
    pub periodicity: Periodicity,
    pub missing: MissingPolicy,
    pub forecaster: ForecasterSpec,
    pub horizon: usize,
    pub explainer: ExplainerConfig,
    pub explain: ExplainRequest,
    pub robustness: RobustnessConfig,
}

impl ResolvedConfig {
    /// sha256 of the canonical (key-sorted) JSON form.
    pub fn hash(&self) -> Result<String> {
        let canonical = serde_json::to_value(self)?.to_string();
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    fn interval(&self) -> (usize, usize) {
        self.explain.interval.unwrap_or((1, self.horizon))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub dataset: String,
    pub input: String,
    pub observations: usize,
    pub periodicity: Periodicity,
    pub forecaster: String,
    pub horizon: usize,
    pub config_hash: String,
    pub features: Vec<String>,
    pub surrogate_trees: usize,
    pub surrogate_rows: usize,
    /// Wall-clock time of the run; the only field that differs between
    /// repeated runs.
    pub generated_at: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastBlock {
    pub timestamps: Vec<String>,
    pub forecaster: Vec<f64>,
    pub surrogate: Vec<f64>,
}

/// SHAP decomposition of one surrogate forecast step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepAttribution {
    pub step: usize,
    pub base_value: f64,
    pub phi: Vec<f64>,
    pub prediction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub metadata: Metadata,
    pub config: ResolvedConfig,
    /// Surrogate against forecaster over the backtest windows; absent when
    /// a metric is undefined (e.g. a constant series).
    pub fidelity: Option<FidelityMetrics>,
    pub forecast: ForecastBlock,
    pub steps: Vec<StepAttribution>,
    pub explanations: Vec<Explanation>,
    pub curves: Vec<CurveSet>,
    pub robustness: Option<Vec<MetricReport>>,
    pub plots: Vec<String>,
}

impl ExplanationReport {
    pub fn explanation(&self, scope: Scope) -> Option<&Explanation> {
        self.explanations.iter().find(|e| e.scope == scope)
    }

    /// Re-check local accuracy of every stored SHAP block.
    pub fn check_local_accuracy(&self) -> Result<()> {
        for s in &self.steps {
            check_accuracy(
                &format!("step {}", s.step),
                s.base_value,
                &s.phi,
                s.prediction,
            )?;
        }
        for e in &self.explanations {
            if let Some(p) = e.prediction {
                check_accuracy(
                    &format!("{:?} explanation", e.scope),
                    e.base_value,
                    &e.values,
                    p,
                )?;
            }
        }
        Ok(())
    }
}

fn check_accuracy(what: &str, base_value: f64, phi: &[f64], prediction: f64) -> Result<()> {
    let shap = ShapVector {
        phi: phi.to_vec(),
        base_value,
    };
    if locally_accurate(&shap, prediction) {
        Ok(())
    } else {
        Err(Error::LocalAccuracy {
            what: what.to_string(),
            sum: shap.prediction(),
            prediction,
        })
    }
}

/// Everything a run computes, before anything is written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: ExplanationReport,
    /// `(file name, SVG document)` pairs.
    pub plots: Vec<(String, String)>,
}

fn ingest(config: &RunConfig) -> Result<TimeSeries> {
    config.validate()?;
    read_csv(&config.input, config.periodicity, config.missing)
}

fn surrogate(series: &TimeSeries, resolved: &ResolvedConfig) -> Result<SurrogateModel> {
    let forecaster = resolved.forecaster.build(resolved.periodicity)?;
    fit_explainer(
        series,
        forecaster.as_ref(),
        Horizon::new(resolved.horizon)?,
        &resolved.explainer,
    )
}

/// Compute a full report without touching the output directory.
pub fn compute(config: &RunConfig) -> Result<RunOutput> {
    let series = ingest(config)?;
    let resolved = config.resolve(&series)?;
    let horizon = Horizon::new(resolved.horizon)?;
    let mut forecaster = resolved.forecaster.build(resolved.periodicity)?;
    forecaster.fit(&series)?;
    let forecast = checked_predict(forecaster.as_ref(), horizon, None)?;

    let model = surrogate(&series, &resolved)?;
    let fidelity = match surrogate_fidelity(&model, &series) {
        Ok(f) => Some(f),
        Err(Error::ZeroVariance(_) | Error::AllReferenceZero) => None,
        Err(e) => return Err(e),
    };
    let surrogate_path = surrogate_forecast(&model, &series, horizon)?.path.values;
    let (shap, output) = step_shap_with_output(&model, &series, horizon.get())?;
    let steps: Vec<StepAttribution> = shap
        .into_iter()
        .zip(output)
        .enumerate()
        .map(|(i, (s, p))| StepAttribution {
            step: i + 1,
            base_value: s.base_value,
            phi: s.phi,
            prediction: p,
        })
        .collect();

    let names = model.feature_names().to_vec();
    let interval = resolved.interval();
    let mut explanations = Vec::new();
    for scope in &resolved.explain.scopes {
        explanations.push(match scope {
            Scope::Local => {
                let s = &steps[resolved.explain.step - 1];
                Explanation {
                    scope: Scope::Local,
                    span: Span::Step { step: s.step },
                    feature_names: names.clone(),
                    values: s.phi.clone(),
                    base_value: s.base_value,
                    prediction: Some(s.prediction),
                }
            }
            Scope::SemiLocal => {
                let window = &steps[interval.0 - 1..interval.1];
                let n = window.len() as f64;
                Explanation {
                    scope: Scope::SemiLocal,
                    span: Span::Interval {
                        start: interval.0,
                        end: interval.1,
                    },
                    feature_names: names.clone(),
                    values: (0..names.len())
                        .map(|j| window.iter().map(|s| s.phi[j]).sum::<f64>() / n)
                        .collect(),
                    base_value: window[0].base_value,
                    prediction: Some(window.iter().map(|s| s.prediction).sum::<f64>() / n),
                }
            }
            Scope::Global => explain_global(&model)?,
        });
    }

    let curve_scope = match resolved.explain.curve_scope {
        Scope::Local => CurveScope::Local {
            step: resolved.explain.step,
        },
        Scope::SemiLocal => CurveScope::SemiLocal {
            start: interval.0,
            end: interval.1,
        },
        Scope::Global => CurveScope::Global,
    };
    let curves = resolved
        .explain
        .pdp
        .iter()
        .map(|f| dependence_curves(&model, &series, f, curve_scope, resolved.explain.grid_size))
        .collect::<Result<Vec<_>>>()?;

    let robustness = if resolved.robustness.enabled {
        let mut pipeline = Pipeline::new(
            resolved.forecaster.build(resolved.periodicity)?,
            horizon,
            resolved.explainer.clone(),
        );
        pipeline.interval = interval;
        Some(evaluate(&pipeline, &series, &resolved.robustness)?)
    } else {
        None
    };

    let timestamps = (0..horizon.get())
        .map(|i| {
            series
                .timestamp_at(series.len() + i)
                .format("%Y-%m-%dT%H:%M:%S")
                .to_string()
        })
        .collect();
    let mut report = ExplanationReport {
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            dataset: resolved.dataset.clone(),
            input: resolved.input.clone(),
            observations: series.len(),
            periodicity: resolved.periodicity,
            forecaster: forecaster.name(),
            horizon: horizon.get(),
            config_hash: resolved.hash()?,
            features: names,
            surrogate_trees: model.ensemble.trees.len(),
            surrogate_rows: model.training.n_rows(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
        config: resolved,
        fidelity,
        forecast: ForecastBlock {
            timestamps,
            forecaster: forecast,
            surrogate: surrogate_path,
        },
        steps,
        explanations,
        curves,
        robustness,
        plots: Vec::new(),
    };
    report.check_local_accuracy()?;
    let plots = if config.plots {
        plots(&report, &series)?
    } else {
        Vec::new()
    };
    report.plots = plots.iter().map(|(name, _)| name.clone()).collect();
    Ok(RunOutput { report, plots })
}

/// Run `config` end to end and write `report.json` plus plots into its
/// output directory.
pub fn run(config: &RunConfig) -> Result<ExplanationReport> {
    let out = compute(config)?;
    std::fs::create_dir_all(&config.output)?;
    for (name, svg) in &out.plots {
        std::fs::write(config.output.join(name), svg)?;
    }
    std::fs::write(config.output.join("report.json"), report_json(&out.report)?)?;
    Ok(out.report)
}

pub fn report_json(report: &ExplanationReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// A single explanation, without plots, curves or robustness metrics.
pub fn explain_only(config: &RunConfig, scope: Scope) -> Result<Explanation> {
    let mut cfg = config.clone();
    cfg.explain.scopes = vec![scope];
    cfg.explain.pdp.clear();
    cfg.robustness.enabled = false;
    cfg.plots = false;
    let out = compute(&cfg)?;
    Ok(out
        .report
        .explanations
        .into_iter()
        .next()
        .expect("one scope requested"))
}

/// File-name-safe form of a feature name.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

const MAX_BARS: usize = 20;

fn plots(report: &ExplanationReport, series: &TimeSeries) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let h = report.metadata.horizon;
    let n = series.len();
    let shown = n.min(3 * h.max(10));
    let hist_x: Vec<f64> = (n - shown..n).map(|i| i as f64).collect();
    let fut_x: Vec<f64> = (n..n + h).map(|i| i as f64).collect();
    out.push((
        "forecast.svg".to_string(),
        render_svg(&PlotSpec::Lines {
            title: format!("{}: forecaster vs surrogate", report.metadata.dataset),
            x_label: "time index".into(),
            y_label: "value".into(),
            lines: vec![
                Line {
                    label: "observed".into(),
                    x: hist_x,
                    y: series.values()[n - shown..].to_vec(),
                },
                Line {
                    label: report.metadata.forecaster.clone(),
                    x: fut_x.clone(),
                    y: report.forecast.forecaster.clone(),
                },
                Line {
                    label: "surrogate".into(),
                    x: fut_x,
                    y: report.forecast.surrogate.clone(),
                },
            ],
        })?,
    ));
    for e in &report.explanations {
        let top: Vec<(&str, f64)> = e.ranking().into_iter().take(MAX_BARS).collect();
        let scope = match e.scope {
            Scope::Local => "local",
            Scope::SemiLocal => "semilocal",
            Scope::Global => "global",
        };
        out.push((
            format!("importance-{scope}.svg"),
            render_svg(&PlotSpec::Bars {
                title: format!("{scope} feature importance"),
                labels: top.iter().map(|(n, _)| n.to_string()).collect(),
                values: top.iter().map(|(_, v)| *v).collect(),
            })?,
        ));
    }
    for c in &report.curves {
        for (kind, y) in [("pdp", &c.pdp), ("sdp", &c.sdp)] {
            out.push((
                format!("{kind}-{}.svg", slug(&c.feature)),
                render_svg(&PlotSpec::Lines {
                    title: format!("{} of {}", kind.to_uppercase(), c.feature),
                    x_label: c.feature.clone(),
                    y_label: if kind == "pdp" {
                        "surrogate output".into()
                    } else {
                        "SHAP value".into()
                    },
                    lines: vec![Line {
                        label: kind.to_uppercase(),
                        x: c.grid.clone(),
                        y: y.clone(),
                    }],
                })?,
            ));
        }
    }
    Ok(out)
}
