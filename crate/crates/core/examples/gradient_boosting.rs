//! Train the gradient-boosted regression trees on a noisy nonlinear
//! function and round-trip the model through JSON.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsshap::gbt::{fit, GbtParams, TreeEnsemble};

fn main() -> tsshap::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<Vec<f64>> = (0..400).map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(0.0..1.0)]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0].sin() * 2.0 + r[1]).collect();
    let names = vec!["x".to_string(), "u".to_string()];

    for n_trees in [1, 10, 100, 300] {
        let params = GbtParams {
            n_trees,
            max_depth: 3,
            ..GbtParams::default()
        };
        let model = fit(&rows, &names, &y, &params)?;
        let mse = rows
            .iter()
            .zip(&y)
            .map(|(r, t)| (model.predict(r).unwrap() - t).powi(2))
            .sum::<f64>()
            / y.len() as f64;
        println!("{n_trees:4} trees: training MSE {mse:.5}");
    }

    let model = fit(&rows, &names, &y, &GbtParams::default())?;
    let back = TreeEnsemble::from_json(&model.to_json()?)?;
    assert_eq!(back.predict(&[1.0, 0.5])?, model.predict(&[1.0, 0.5])?);
    println!("f(1.0, 0.5) = {:.4} (truth {:.4})", model.predict(&[1.0, 0.5])?, 1f64.sin() * 2.0 + 0.5);
    Ok(())
}
