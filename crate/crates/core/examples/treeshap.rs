//! Exact SHAP values for a tree ensemble, checked against brute-force
//! Shapley enumeration.

use tsshap::gbt::{fit, GbtParams};
use tsshap::treeshap::{brute_shapley, expected_value, tree_shap};

fn main() -> tsshap::Result<()> {
    // y = 3*a + b*c, with d irrelevant
    let grid = [0.0, 1.0, 2.0];
    let mut rows = Vec::new();
    for a in grid {
        for b in grid {
            for c in grid {
                for d in grid {
                    rows.push(vec![a, b, c, d]);
                }
            }
        }
    }
    let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] + r[1] * r[2]).collect();
    let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let model = fit(&rows, &names, &y, &GbtParams { n_trees: 50, max_depth: 3, min_samples_leaf: 1, ..GbtParams::default() })?;

    println!("E[f(X)] over training covers = {:.4}", expected_value(&model)?);
    for x in [[2.0, 2.0, 2.0, 0.0], [0.0, 2.0, 0.0, 2.0]] {
        let fast = tree_shap(&model, &x)?;
        let slow = brute_shapley(&model, &x)?;
        let gap = fast.phi.iter().zip(&slow.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("x = {x:?}");
        for (n, p) in names.iter().zip(&fast.phi) {
            println!("  phi[{n}] = {p:8.4}");
        }
        println!("  base + sum(phi) = {:.4}, f(x) = {:.4}, max |tree - brute| = {gap:.1e}", fast.prediction(), model.predict(&x)?);
    }
    Ok(())
}
