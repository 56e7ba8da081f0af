//! Exact SHAP values for tree ensembles.
//!
//! [`tree_shap`] is the polynomial-time path-dependent recursion: features
//! outside the coalition follow both branches, weighted by the share of
//! training cover each child received. [`brute_shapley`] enumerates every
//! coalition under the same conditional expectation and exists to check
//! the fast path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::gbt::{Tree, TreeEnsemble, TreeNode};

/// Attributions for one instance. `base_value + phi.sum()` reproduces the
/// model output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapVector {
    pub phi: Vec<f64>,
    pub base_value: f64,
}

impl ShapVector {
    pub fn prediction(&self) -> f64 {
        self.base_value + self.phi.iter().sum::<f64>()
    }
}

/// Coalition size limit for [`brute_shapley`].
pub const BRUTE_FORCE_MAX_FEATURES: usize = 12;

/// Expected output with no features fixed.
pub fn expected_value(model: &TreeEnsemble) -> Result<f64> {
    check_covers(model)?;
    Ok(model.base_score
        + model.learning_rate * model.trees.iter().map(|t| unconditional(t)).sum::<f64>())
}

pub fn tree_shap(model: &TreeEnsemble, x: &[f64]) -> Result<ShapVector> {
    model.check_input(x)?;
    check_covers(model)?;
    Ok(tree_shap_unchecked(model, x))
}

fn tree_shap_unchecked(model: &TreeEnsemble, x: &[f64]) -> ShapVector {
    let prepared = Prepared::new(model);
    prepared.shap(model, x, &mut Vec::new())
}

/// Row-independent parts of the computation, shared across a batch.
struct Prepared {
    base_value: f64,
    scratch_len: usize,
}

impl Prepared {
    fn new(model: &TreeEnsemble) -> Self {
        let base: f64 = model.trees.iter().map(unconditional).sum();
        let depth = model.trees.iter().map(Tree::depth).max().unwrap_or(0);
        Prepared {
            base_value: model.base_score + model.learning_rate * base,
            // path segments of length 1..=depth+1, one per recursion level
            scratch_len: (depth + 2) * (depth + 3) / 2,
        }
    }

    fn shap(&self, model: &TreeEnsemble, x: &[f64], scratch: &mut Vec<PathElem>) -> ShapVector {
        scratch.resize(self.scratch_len, PathElem::EMPTY);
        let mut phi = vec![0.0; x.len()];
        let mut tree_phi = vec![0.0; x.len()];
        for tree in &model.trees {
            tree_phi.iter_mut().for_each(|v| *v = 0.0);
            recurse(tree, x, &mut tree_phi, 0, scratch, 0, 0, 1.0, 1.0, None);
            for (p, t) in phi.iter_mut().zip(&tree_phi) {
                *p += model.learning_rate * t;
            }
        }
        ShapVector {
            phi,
            base_value: self.base_value,
        }
    }
}

/// Exact Shapley values by subset enumeration. Exponential in the number
/// of features; intended as a test oracle.
pub fn brute_shapley(model: &TreeEnsemble, x: &[f64]) -> Result<ShapVector> {
    model.check_input(x)?;
    check_covers(model)?;
    let d = x.len();
    if d > BRUTE_FORCE_MAX_FEATURES {
        return Err(Error::TooManyFeatures {
            max: BRUTE_FORCE_MAX_FEATURES,
            actual: d,
        });
    }
    let value = |mask: u32| -> f64 {
        let fixed: Vec<bool> = (0..d).map(|j| mask & (1 << j) != 0).collect();
        model.base_score
            + model.learning_rate
                * model
                    .trees
                    .iter()
                    .map(|t| cond_masked(t, 0, x, &fixed))
                    .sum::<f64>()
    };
    let v: Vec<f64> = (0..1u32 << d).map(value).collect();

    let mut fact = vec![1.0; d + 1];
    for k in 1..=d {
        fact[k] = fact[k - 1] * k as f64;
    }
    let mut phi = vec![0.0; d];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1u32 << i;
        for mask in 0..1u32 << d {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = fact[s] * fact[d - s - 1] / fact[d];
            *p += w * (v[(mask | bit) as usize] - v[mask as usize]);
        }
    }
    Ok(ShapVector {
        phi,
        base_value: v[0],
    })
}

/// Row-wise [`tree_shap`] over a feature matrix, in row order.
pub fn shap_matrix(model: &TreeEnsemble, x: &FeatureMatrix) -> Result<Vec<ShapVector>> {
    shap_rows(model, &x.rows)
}

pub fn shap_rows(model: &TreeEnsemble, rows: &[Vec<f64>]) -> Result<Vec<ShapVector>> {
    check_covers(model)?;
    for row in rows {
        model.check_input(row)?;
    }
    let prepared = Prepared::new(model);
    Ok(rows
        .par_iter()
        .map_init(Vec::new, |scratch, r| prepared.shap(model, r, scratch))
        .collect())
}

fn check_covers(model: &TreeEnsemble) -> Result<()> {
    for (t, tree) in model.trees.iter().enumerate() {
        for (i, node) in tree.nodes.iter().enumerate() {
            let c = node.cover();
            let ok = match node {
                TreeNode::Split { .. } => c.is_finite() && c > 0.0,
                TreeNode::Leaf { .. } => c.is_finite() && c >= 0.0,
            };
            if !ok {
                return Err(Error::MissingCover { tree: t, node: i });
            }
        }
    }
    Ok(())
}

/// Expectation of one tree with no feature fixed.
fn unconditional(tree: &Tree) -> f64 {
    cond_masked(tree, 0, &[], &[])
}

/// Path-dependent expectation fixing the features flagged in `fixed`;
/// unfixed splits average their children by cover.
fn cond_masked(tree: &Tree, node: usize, x: &[f64], fixed: &[bool]) -> f64 {
    match &tree.nodes[node] {
        TreeNode::Leaf { value, .. } => *value,
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            cover,
        } => {
            if fixed.get(*feature).copied().unwrap_or(false) {
                let next = if x[*feature] < *threshold {
                    *left
                } else {
                    *right
                };
                cond_masked(tree, next, x, fixed)
            } else {
                let wl = tree.nodes[*left].cover() / cover;
                let wr = tree.nodes[*right].cover() / cover;
                wl * cond_masked(tree, *left, x, fixed) + wr * cond_masked(tree, *right, x, fixed)
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct PathElem {
    feature: Option<usize>,
    zero: f64,
    one: f64,
    weight: f64,
}

impl PathElem {
    const EMPTY: PathElem = PathElem {
        feature: None,
        zero: 0.0,
        one: 0.0,
        weight: 0.0,
    };
}

/// Append an element to the first `l` entries of `path`.
fn extend(path: &mut [PathElem], l: usize, zero: f64, one: f64, feature: Option<usize>) {
    path[l] = PathElem {
        feature,
        zero,
        one,
        weight: if l == 0 { 1.0 } else { 0.0 },
    };
    let denom = (l + 1) as f64;
    for i in (0..l).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / denom;
        path[i].weight = zero * path[i].weight * (l - i) as f64 / denom;
    }
}

/// Remove element `index`; `path` shrinks by one in the caller.
fn unwind(path: &mut [PathElem], index: usize) {
    let depth = path.len() - 1;
    let PathElem { zero, one, .. } = path[index];
    let denom = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * denom / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (depth - i) as f64 / denom;
        } else {
            path[i].weight = path[i].weight * denom / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

fn unwound_sum(path: &[PathElem], index: usize) -> f64 {
    let depth = path.len() - 1;
    let PathElem { zero, one, .. } = path[index];
    let denom = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one * denom / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (depth - i) as f64 / denom;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((depth - i) as f64 / denom);
        }
    }
    total
}

/// `buf[start..start + len]` holds the parent's path; children get their
/// own copy right after it.
#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &Tree,
    x: &[f64],
    phi: &mut [f64],
    node: usize,
    buf: &mut [PathElem],
    start: usize,
    len: usize,
    zero: f64,
    one: f64,
    feature: Option<usize>,
) {
    extend(&mut buf[start..], len, zero, one, feature);
    let mut plen = len + 1;
    match &tree.nodes[node] {
        TreeNode::Leaf { value, .. } => {
            let path = &buf[start..start + plen];
            for i in 1..plen {
                let w = unwound_sum(path, i);
                let el = path[i];
                if let Some(f) = el.feature {
                    phi[f] += w * (el.one - el.zero) * value;
                }
            }
        }
        TreeNode::Split {
            feature: f,
            threshold,
            left,
            right,
            cover,
        } => {
            let (hot, cold) = if x[*f] < *threshold {
                (*left, *right)
            } else {
                (*right, *left)
            };
            let hot_zero = tree.nodes[hot].cover() / cover;
            let cold_zero = tree.nodes[cold].cover() / cover;
            let (mut in_zero, mut in_one) = (1.0, 1.0);
            if let Some(k) = (1..plen).find(|&k| buf[start + k].feature == Some(*f)) {
                in_zero = buf[start + k].zero;
                in_one = buf[start + k].one;
                unwind(&mut buf[start..start + plen], k);
                plen -= 1;
            }
            let child = start + len + 1;
            buf.copy_within(start..start + plen, child);
            recurse(tree, x, phi, hot, buf, child, plen, hot_zero * in_zero, in_one, Some(*f));
            // a cold branch with no cover carries zero weight everywhere
            if cold_zero * in_zero > 0.0 {
                buf.copy_within(start..start + plen, child);
                recurse(tree, x, phi, cold, buf, child, plen, cold_zero * in_zero, 0.0, Some(*f));
            }
        }
    }
}
