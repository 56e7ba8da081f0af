use super::*;
use crate::forecast::{MovingAverage, Naive, SeasonalNaive};
use crate::gbt::{Tree, TreeNode};
use crate::series::Periodicity;
use crate::synthetic::{constant, Seasonal};

fn h(n: usize) -> Horizon {
    Horizon::new(n).unwrap()
}

fn seasonal() -> TimeSeries {
    Seasonal::default().series().unwrap()
}

fn fit_on(series: &TimeSeries, f: &dyn Forecaster, horizon: usize) -> SurrogateModel {
    fit_explainer(series, f, h(horizon), &ExplainerConfig::for_series(series)).unwrap()
}

#[test]
fn naive_targets_equal_lag_one_column() {
    let s = seasonal();
    for mode in [TargetMode::AllSteps, TargetMode::FirstStep] {
        let cfg = ExplainerConfig {
            target_mode: mode,
            ..ExplainerConfig::for_series(&s)
        };
        let m = fit_explainer(&s, &Naive::default(), h(6), &cfg).unwrap();
        let lag1 = m.training.column("y(t-1)").unwrap();
        assert_eq!(m.targets, lag1);
    }
}

#[test]
fn first_step_targets_sit_at_origins() {
    let s = seasonal();
    let cfg = ExplainerConfig {
        target_mode: TargetMode::FirstStep,
        ..ExplainerConfig::for_series(&s)
    };
    let m = fit_explainer(&s, &Naive::default(), h(4), &cfg).unwrap();
    let origins: Vec<usize> = m.backtest.paths.iter().map(|p| p.origin).collect();
    assert_eq!(m.training.row_index, origins);
    for (t, y) in m.training.row_index.iter().zip(&m.targets) {
        assert_eq!(*y, s.values()[t - 1]);
    }
}

#[test]
fn constant_series_surrogate() {
    let s = constant(80, 4.0, Periodicity::Monthly).unwrap();
    let m = fit_on(&s, &Naive::default(), 8);
    let fc = surrogate_forecast(&m, &s, h(8)).unwrap();
    assert!(fc.path.values.iter().all(|v| (v - 4.0).abs() < 1e-6));
    let semi = explain_semi_local(&m, &s, 1, 8).unwrap();
    assert!(semi.values.iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn underdetermined() {
    let s = seasonal().truncate(40);
    let mut cfg = ExplainerConfig::for_series(&s);
    cfg.splitter.step = Some(4);
    cfg.target_mode = TargetMode::FirstStep;
    assert!(matches!(
        fit_explainer(&s, &Naive::default(), h(4), &cfg),
        Err(Error::SurrogateUnderdetermined { required: 10, .. })
    ));
}

#[test]
fn seasonal_naive_fidelity() {
    let wave = Seasonal {
        noise: 0.0,
        slope: 0.0,
        ..Seasonal::default()
    };
    let s = wave.series().unwrap();
    let m = fit_on(&s, &SeasonalNaive::new(12).unwrap(), 12);
    let fid = surrogate_fidelity(&m, &s).unwrap();
    assert!(fid.mase <= 0.25, "{fid:?}");
}

#[test]
fn single_step_equals_predict() {
    let s = seasonal();
    let m = fit_on(&s, &Naive::default(), 6);
    let fc = surrogate_forecast(&m, &s, h(1)).unwrap();
    let row = m.features.row(&s, s.len()).unwrap();
    assert_eq!(fc.path.values[0], m.ensemble.predict(&row).unwrap());
    assert_eq!(fc.rows[0], row);
}

#[test]
fn recursion_feeds_back_predictions() {
    let s = seasonal();
    let m = fit_on(&s, &MovingAverage::new(6).unwrap(), 6);
    let fc = surrogate_forecast(&m, &s, h(3)).unwrap();
    // rebuild step 3 by hand with a perturbed step-1 prediction
    let mut changed = false;
    for delta in [5.0, -5.0, 20.0, -20.0] {
        let ext = extend_with_prediction(&s, fc.path.values[0] + delta).unwrap();
        let ext = extend_with_prediction(&ext, fc.path.values[1]).unwrap();
        let row3 = m.features.row(&ext, ext.len()).unwrap();
        assert_ne!(row3, fc.rows[2]);
        changed |= m.ensemble.predict(&row3).unwrap() != fc.path.values[2];
    }
    assert!(changed);
    // unperturbed reconstruction matches
    let ext = extend_with_prediction(&s, fc.path.values[0]).unwrap();
    let ext = extend_with_prediction(&ext, fc.path.values[1]).unwrap();
    assert_eq!(m.features.row(&ext, ext.len()).unwrap(), fc.rows[2]);
}

#[test]
fn recursive_purity() {
    let s = seasonal();
    let m = fit_on(&s, &SeasonalNaive::new(12).unwrap(), 12);
    assert_eq!(
        surrogate_forecast(&m, &s, h(12)).unwrap(),
        surrogate_forecast(&m, &s, h(12)).unwrap()
    );
}

#[test]
fn local_explanations() {
    let s = seasonal();
    let m = fit_on(&s, &Naive::default(), 6);
    let e = explain_local(&m, &s, 1).unwrap();
    assert_eq!(e.top_feature(), Some("y(t-1)"));
    let fc = surrogate_forecast(&m, &s, h(6)).unwrap();
    for step in 1..=6 {
        let e = explain_local(&m, &s, step).unwrap();
        let p = fc.path.values[step - 1];
        assert_eq!(e.prediction, Some(p));
        let sum = e.base_value + e.values.iter().sum::<f64>();
        assert!((sum - p).abs() <= 1e-6 * p.abs().max(1.0));
    }
    assert!(matches!(
        explain_local(&m, &s, 0),
        Err(Error::HorizonOutOfRange {
            step: 0,
            horizon: 6
        })
    ));
    assert!(matches!(
        explain_local(&m, &s, 7),
        Err(Error::HorizonOutOfRange { .. })
    ));
}

#[test]
fn semi_local_single_step_is_local() {
    let s = seasonal();
    for f in [
        Box::new(Naive::default()) as Box<dyn Forecaster>,
        Box::new(SeasonalNaive::new(12).unwrap()),
        Box::new(MovingAverage::new(6).unwrap()),
    ] {
        let m = fit_on(&s, f.as_ref(), 6);
        for step in 1..=6 {
            let a = explain_local(&m, &s, step).unwrap();
            let b = explain_semi_local(&m, &s, step, step).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
    let m = fit_on(&s, &Naive::default(), 6);
    assert!(matches!(
        explain_semi_local(&m, &s, 3, 2),
        Err(Error::EmptyInterval { start: 3, end: 2 })
    ));
}

#[test]
fn seasonal_lag_dominates_seasonal_naive() {
    let s = seasonal();
    let m = fit_on(&s, &SeasonalNaive::new(12).unwrap(), 12);
    let e = explain_semi_local(&m, &s, 1, 12).unwrap();
    let top = e
        .feature_names
        .iter()
        .zip(&e.values)
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    // the mean |phi| ranking, computed from per-step vectors
    let shap = step_shap(&m, &s, 12).unwrap();
    let mean_abs: Vec<f64> = (0..e.values.len())
        .map(|j| shap.iter().map(|v| v.phi[j].abs()).sum::<f64>() / 12.0)
        .collect();
    let best = mean_abs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(e.feature_names[best], "y(t-12)", "signed top was {top:?}");
}

#[test]
fn global_importance() {
    let s = seasonal();
    let m = fit_on(&s, &MovingAverage::new(6).unwrap(), 6);
    let g = explain_global(&m).unwrap();
    assert!(g.values.iter().all(|v| *v >= 0.0 && v.is_finite()));
    assert_eq!(g.top_feature(), Some("y-mean(t-1,t-6)"));
    let used: std::collections::HashSet<usize> = m
        .ensemble
        .trees
        .iter()
        .flat_map(Tree::split_features)
        .collect();
    for (j, v) in g.values.iter().enumerate() {
        if !used.contains(&j) {
            assert_eq!(*v, 0.0);
        }
    }
}

#[test]
fn curves() {
    let s = seasonal();
    let m = fit_on(&s, &Naive::default(), 6);
    let g = explain_global(&m).unwrap();
    let unused = g
        .feature_names
        .iter()
        .zip(&g.values)
        .find(|(_, v)| **v == 0.0)
        .map(|(n, _)| n.clone());
    if let Some(name) = unused {
        let c = dependence_curves(&m, &s, &name, CurveScope::Global, 10);
        if let Ok(c) = c {
            assert!(c.sdp.iter().all(|v| *v == 0.0));
        }
    }
    let c = dependence_curves(
        &m,
        &s,
        "y(t-1)",
        CurveScope::Local { step: 1 },
        DEFAULT_GRID_SIZE,
    )
    .unwrap();
    assert_eq!(c.grid.len(), 20);
    assert!(c.grid.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(c.pdp.len(), 20);
    assert!(matches!(
        dependence_curves(&m, &s, "nope", CurveScope::Global, 10),
        Err(Error::UnknownFeature(_))
    ));
    // month is an ordinal: grid is its distinct values
    let c = dependence_curves(
        &m,
        &s,
        "month",
        CurveScope::SemiLocal { start: 1, end: 3 },
        20,
    )
    .unwrap();
    assert_eq!(c.grid, (1..=12).map(f64::from).collect::<Vec<_>>());
    // every training row is a month start, so this column is constant
    assert!(matches!(
        dependence_curves(&m, &s, "is-month-start", CurveScope::Global, 10),
        Err(Error::DegenerateRange(_))
    ));
}

#[test]
fn stump_pdp_is_a_step() {
    let s = seasonal();
    let mut m = fit_on(&s, &Naive::default(), 6);
    let j = m.features.index_of("y(t-1)").unwrap();
    let theta = 52.0;
    m.ensemble = TreeEnsemble {
        trees: vec![Tree {
            nodes: vec![
                TreeNode::Split {
                    feature: j,
                    threshold: theta,
                    left: 1,
                    right: 2,
                    cover: 10.0,
                },
                TreeNode::Leaf {
                    value: -1.0,
                    cover: 5.0,
                },
                TreeNode::Leaf {
                    value: 1.0,
                    cover: 5.0,
                },
            ],
        }],
        learning_rate: 1.0,
        base_score: 0.0,
        feature_names: m.features.names().to_vec(),
    };
    let c = dependence_curves(&m, &s, "y(t-1)", CurveScope::Global, 25).unwrap();
    for (g, p) in c.grid.iter().zip(&c.pdp) {
        assert_eq!(*p, if *g < theta { -1.0 } else { 1.0 });
    }
}
