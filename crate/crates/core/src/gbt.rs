//! Gradient-boosted regression trees with squared-error loss.
//!
//! Trees are grown level by level with exact greedy splits: candidate
//! thresholds are midpoints between consecutive distinct feature values,
//! and the split maximising variance reduction wins. Among equal gains the
//! lowest feature index, then the lowest threshold, is kept. Every node
//! stores its training cover so TreeSHAP can weight unfixed branches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// A node of a regression tree stored in a flat arena. Samples with
/// `x[feature] < threshold` go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        cover: f64,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl TreeNode {
    pub fn cover(&self) -> f64 {
        match self {
            TreeNode::Split { cover, .. } | TreeNode::Leaf { cover, .. } => *cover,
        }
    }
}

/// One regression tree; the root is `nodes[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(value: f64, cover: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value, cover }],
        }
    }

    /// Raw tree output (before the learning rate).
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    /// Features used by at least one split.
    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Split { feature, .. } => Some(*feature),
            TreeNode::Leaf { .. } => None,
        })
    }
}

/// A fitted ensemble: `predict(x) = base_score + learning_rate * sum(tree(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub base_score: f64,
    pub feature_names: Vec<String>,
}

impl TreeEnsemble {
    /// A model with no trees that always predicts `base_score`.
    pub fn constant(base_score: f64, feature_names: Vec<String>) -> Self {
        TreeEnsemble {
            trees: Vec::new(),
            learning_rate: 1.0,
            base_score,
            feature_names,
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Validated prediction.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.len(),
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { index, value });
        }
        Ok(())
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Convenience form of [`TreeEnsemble::predict`].
pub fn gbt_predict(model: &TreeEnsemble, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub learning_rate: f64,
    pub subsample_fraction: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 200,
            max_depth: 4,
            min_samples_leaf: 3,
            learning_rate: 0.1,
            subsample_fraction: 1.0,
            seed: 0,
        }
    }
}

// manual impl: f64 fields, but configs never hold NaN after validation
impl std::hash::Hash for GbtParams {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n_trees.hash(state);
        self.max_depth.hash(state);
        self.min_samples_leaf.hash(state);
        self.learning_rate.to_bits().hash(state);
        self.subsample_fraction.to_bits().hash(state);
        self.seed.hash(state);
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees", "must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::invalid("max_depth", "must be at least 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::invalid("learning_rate", "must lie in (0, 1]"));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(Error::invalid("subsample_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Fit on a [`FeatureMatrix`].
pub fn gbt_fit(x: &FeatureMatrix, y: &[f64], params: &GbtParams) -> Result<TreeEnsemble> {
    fit(&x.rows, &x.names, y, params)
}

/// Fit on row-major data.
pub fn fit(
    rows: &[Vec<f64>],
    feature_names: &[String],
    y: &[f64],
    params: &GbtParams,
) -> Result<TreeEnsemble> {
    params.validate()?;
    let n = rows.len();
    if n < 2 {
        return Err(Error::EmptyTraining);
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            what: "targets".into(),
            expected: n,
            actual: y.len(),
        });
    }
    let d = feature_names.len();
    for row in rows {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: row.len(),
            });
        }
        if let Some((index, &value)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { index, value });
        }
    }
    if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index, value });
    }

    let base_score = y.iter().sum::<f64>() / n as f64;
    if y.iter().all(|v| *v == y[0]) {
        return Ok(TreeEnsemble::constant(y[0], feature_names.to_vec()));
    }

    let columns: Vec<Vec<f64>> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let sorted: Vec<Vec<u32>> = columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pred = vec![base_score; n];
    let mut residual = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_trees);
    let grower = Grower {
        columns: &columns,
        sorted: &sorted,
        max_depth: params.max_depth,
        min_leaf: params.min_samples_leaf,
    };
    for _ in 0..params.n_trees {
        for i in 0..n {
            residual[i] = y[i] - pred[i];
        }
        let in_sample = draw_subsample(n, params.subsample_fraction, &mut rng);
        let tree = grower.grow(&residual, &in_sample);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += params.learning_rate * tree.predict(&rows[i]);
        }
        trees.push(tree);
    }
    Ok(TreeEnsemble {
        trees,
        learning_rate: params.learning_rate,
        base_score,
        feature_names: feature_names.to_vec(),
    })
}

fn draw_subsample(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    if fraction >= 1.0 {
        return vec![true; n];
    }
    let k = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut mask = vec![false; n];
    for i in rand::seq::index::sample(rng, n, k) {
        mask[i] = true;
    }
    mask
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    sorted: &'a [Vec<u32>],
    max_depth: usize,
    min_leaf: usize,
}

#[derive(Clone, Copy)]
struct NodeStats {
    node: usize,
    sum: f64,
    sum_sq: f64,
    count: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

const UNASSIGNED: usize = usize::MAX;

impl Grower<'_> {
    fn grow(&self, target: &[f64], in_sample: &[bool]) -> Tree {
        let n = target.len();
        let mut assign = vec![UNASSIGNED; n];
        let mut root = NodeStats {
            node: 0,
            sum: 0.0,
            sum_sq: 0.0,
            count: 0,
        };
        for i in 0..n {
            if in_sample[i] {
                assign[i] = 0;
                root.sum += target[i];
                root.sum_sq += target[i] * target[i];
                root.count += 1;
            }
        }
        let mut nodes = vec![leaf_of(&root)];
        let mut frontier = vec![root];

        for _depth in 0..self.max_depth {
            if frontier.is_empty() {
                break;
            }
            // slot lookup: node id -> position in frontier
            let mut slot_of = vec![UNASSIGNED; nodes.len()];
            for (s, st) in frontier.iter().enumerate() {
                if st.count >= 2 * self.min_leaf {
                    slot_of[st.node] = s;
                }
            }
            let best = self.best_splits(target, &assign, &slot_of, &frontier);

            let mut next = Vec::new();
            let mut child_slots: Vec<Option<(usize, usize)>> = vec![None; frontier.len()];
            for (s, st) in frontier.iter().enumerate() {
                let Some(c) = best[s] else { continue };
                let left = nodes.len();
                let right = left + 1;
                nodes.push(TreeNode::Leaf {
                    value: 0.0,
                    cover: 0.0,
                });
                nodes.push(TreeNode::Leaf {
                    value: 0.0,
                    cover: 0.0,
                });
                nodes[st.node] = TreeNode::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                    cover: st.count as f64,
                };
                child_slots[s] = Some((left, right));
            }
            if child_slots.iter().all(Option::is_none) {
                break;
            }
            // route samples and accumulate child statistics
            let mut stats: std::collections::BTreeMap<usize, NodeStats> =
                std::collections::BTreeMap::new();
            let mut frontier_slot = vec![UNASSIGNED; nodes.len()];
            for (s, st) in frontier.iter().enumerate() {
                frontier_slot[st.node] = s;
            }
            for i in 0..n {
                let node = assign[i];
                if node == UNASSIGNED {
                    continue;
                }
                let s = frontier_slot[node];
                if s == UNASSIGNED {
                    continue;
                }
                match child_slots[s] {
                    Some((left, right)) => {
                        let TreeNode::Split {
                            feature, threshold, ..
                        } = nodes[node]
                        else {
                            unreachable!()
                        };
                        let child = if self.columns[feature][i] < threshold {
                            left
                        } else {
                            right
                        };
                        assign[i] = child;
                        let e = stats.entry(child).or_insert(NodeStats {
                            node: child,
                            sum: 0.0,
                            sum_sq: 0.0,
                            count: 0,
                        });
                        e.sum += target[i];
                        e.sum_sq += target[i] * target[i];
                        e.count += 1;
                    }
                    None => assign[i] = UNASSIGNED,
                }
            }
            for st in stats.values() {
                nodes[st.node] = leaf_of(st);
                next.push(*st);
            }
            frontier = next;
        }
        Tree { nodes }
    }

    fn best_splits(
        &self,
        target: &[f64],
        assign: &[usize],
        slot_of: &[usize],
        frontier: &[NodeStats],
    ) -> Vec<Option<Candidate>> {
        let k = frontier.len();
        let mut best: Vec<Option<Candidate>> = vec![None; k];
        let mut left_sum = vec![0.0; k];
        let mut left_n = vec![0usize; k];
        let mut last: Vec<Option<f64>> = vec![None; k];
        for (feature, order) in self.sorted.iter().enumerate() {
            left_sum.iter_mut().for_each(|v| *v = 0.0);
            left_n.iter_mut().for_each(|v| *v = 0);
            last.iter_mut().for_each(|v| *v = None);
            let column = &self.columns[feature];
            for &i in order {
                let i = i as usize;
                let node = assign[i];
                if node == UNASSIGNED || node >= slot_of.len() {
                    continue;
                }
                let s = slot_of[node];
                if s == UNASSIGNED {
                    continue;
                }
                let v = column[i];
                if let Some(prev) = last[s] {
                    let st = frontier[s];
                    let nl = left_n[s];
                    let nr = st.count - nl;
                    if v > prev && nl >= self.min_leaf && nr >= self.min_leaf {
                        let sl = left_sum[s];
                        let sr = st.sum - sl;
                        let gain = sl * sl / nl as f64 + sr * sr / nr as f64
                            - st.sum * st.sum / st.count as f64;
                        let floor = 1e-12 * st.sum_sq.max(f64::MIN_POSITIVE);
                        let better = match best[s] {
                            None => gain > floor,
                            Some(b) => gain > b.gain,
                        };
                        if better {
                            best[s] = Some(Candidate {
                                gain,
                                feature,
                                threshold: midpoint(prev, v),
                            });
                        }
                    }
                }
                left_sum[s] += target[i];
                left_n[s] += 1;
                last[s] = Some(v);
            }
        }
        best
    }
}

fn leaf_of(st: &NodeStats) -> TreeNode {
    TreeNode::Leaf {
        value: if st.count > 0 {
            st.sum / st.count as f64
        } else {
            0.0
        },
        cover: st.count as f64,
    }
}

/// Threshold strictly above `lo` and at most `hi`, so `lo` routes left and
/// `hi` routes right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if lo < mid && mid <= hi {
        mid
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("x{j}")).collect()
    }

    fn stump_params() -> GbtParams {
        GbtParams {
            n_trees: 1,
            max_depth: 1,
            min_samples_leaf: 1,
            learning_rate: 1.0,
            ..GbtParams::default()
        }
    }

    fn mse(model: &TreeEnsemble, rows: &[Vec<f64>], y: &[f64]) -> f64 {
        rows.iter()
            .zip(y)
            .map(|(r, t)| (model.predict(r).unwrap() - t).powi(2))
            .sum::<f64>()
            / y.len() as f64
    }

    #[test]
    fn constant_target_gives_constant_model() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let m = fit(&rows, &names(1), &[4.5; 10], &GbtParams::default()).unwrap();
        assert!(m.trees.is_empty());
        assert_eq!(m.predict(&[100.0]).unwrap(), 4.5);
    }

    #[test]
    fn step_function_stump() {
        let xs = [0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|&x| if x < 0.5 { 0.0 } else { 1.0 })
            .collect();
        let m = fit(&rows, &names(1), &y, &stump_params()).unwrap();
        let TreeNode::Split {
            feature,
            threshold,
            cover,
            ..
        } = m.trees[0].nodes[0]
        else {
            panic!("root must split")
        };
        assert_eq!(feature, 0);
        // midpoint of 0.4 and 0.6
        assert!((threshold - 0.5).abs() < 1e-15);
        assert_eq!(cover, 8.0);
        assert_eq!(mse(&m, &rows, &y), 0.0);
        assert_eq!(m.predict(&[0.9]).unwrap(), 1.0);
        assert_eq!(m.predict(&[0.1]).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_rows_predict_their_mean() {
        let rows = vec![vec![1.0], vec![1.0]];
        let m = fit(
            &rows,
            &names(1),
            &[2.0, 4.0],
            &GbtParams {
                min_samples_leaf: 1,
                ..GbtParams::default()
            },
        )
        .unwrap();
        let p = m.predict(&[1.0]).unwrap();
        assert!((p - 3.0).abs() < 1e-12);
        assert!((mse(&m, &rows, &[2.0, 4.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_tree_ensemble_predicts_base() {
        let m = TreeEnsemble::constant(5.0, names(3));
        assert_eq!(gbt_predict(&m, &[1.0, 2.0, 3.0]).unwrap(), 5.0);
    }

    #[test]
    fn input_validation() {
        let m = TreeEnsemble::constant(5.0, names(2));
        assert!(matches!(
            m.predict(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
        assert!(matches!(
            m.predict(&[1.0, f64::NAN]),
            Err(Error::NonFiniteFeature { index: 1, .. })
        ));
        assert!(matches!(
            fit(&[vec![1.0]], &names(1), &[1.0], &GbtParams::default()),
            Err(Error::EmptyTraining)
        ));
        let bad = GbtParams {
            subsample_fraction: 0.0,
            ..GbtParams::default()
        };
        assert!(fit(&[vec![1.0], vec![2.0]], &names(1), &[1.0, 2.0], &bad).is_err());
    }

    #[test]
    fn ties_prefer_lowest_feature_then_threshold() {
        // x0 and x1 are identical columns: same gain, feature 0 must win
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let m = fit(&rows, &names(2), &y, &stump_params()).unwrap();
        let TreeNode::Split {
            feature, threshold, ..
        } = m.trees[0].nodes[0]
        else {
            panic!()
        };
        assert_eq!((feature, threshold), (0, 2.5));

        // symmetric target: splits at 0.5 and 2.5 give the same gain
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let y = [1.0, 0.0, 0.0, 1.0];
        let m = fit(&rows, &names(1), &y, &stump_params()).unwrap();
        let TreeNode::Split { threshold, .. } = m.trees[0].nodes[0] else {
            panic!()
        };
        assert_eq!(threshold, 0.5);
    }

    #[test]
    fn covers_add_up() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 7) as f64, (i * 13 % 11) as f64])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 - r[1]).collect();
        let m = fit(
            &rows,
            &names(2),
            &y,
            &GbtParams {
                n_trees: 5,
                ..GbtParams::default()
            },
        )
        .unwrap();
        for t in &m.trees {
            assert_eq!(t.nodes[0].cover(), 50.0);
            for n in &t.nodes {
                if let TreeNode::Split {
                    left,
                    right,
                    cover,
                    threshold,
                    ..
                } = n
                {
                    assert_eq!(*cover, t.nodes[*left].cover() + t.nodes[*right].cover());
                    assert!(threshold.is_finite());
                }
            }
            assert!(t.depth() <= 4);
        }
    }

    #[test]
    fn json_roundtrip() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let m = fit(
            &rows,
            &names(1),
            &y,
            &GbtParams {
                n_trees: 3,
                ..GbtParams::default()
            },
        )
        .unwrap();
        let back = TreeEnsemble::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
    }

    fn dataset() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (5usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn training_loss_non_increasing((rows, y) in dataset()) {
            let mut prev = f64::INFINITY;
            for k in 1..=6 {
                let p = GbtParams { n_trees: k, min_samples_leaf: 1, max_depth: 2, learning_rate: 0.5, ..GbtParams::default() };
                let m = fit(&rows, &names(3), &y, &p).unwrap();
                let loss = mse(&m, &rows, &y);
                prop_assert!(loss <= prev + 1e-9);
                prev = loss;
            }
        }

        #[test]
        fn mean_is_conserved((rows, y) in dataset()) {
            let p = GbtParams { n_trees: 4, learning_rate: 1.0, min_samples_leaf: 1, ..GbtParams::default() };
            let m = fit(&rows, &names(3), &y, &p).unwrap();
            let mean_pred = rows.iter().map(|r| m.predict(r).unwrap()).sum::<f64>() / rows.len() as f64;
            let mean_y = y.iter().sum::<f64>() / y.len() as f64;
            prop_assert!((mean_pred - mean_y).abs() < 1e-9);
        }

        #[test]
        fn deterministic_under_seed((rows, y) in dataset(), seed in 0u64..1000) {
            let p = GbtParams { n_trees: 5, subsample_fraction: 0.7, seed, ..GbtParams::default() };
            prop_assert_eq!(fit(&rows, &names(3), &y, &p).unwrap(), fit(&rows, &names(3), &y, &p).unwrap());
        }
    }
}
