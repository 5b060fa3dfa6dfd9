//! Kernel SHAP in both modes on a small nonlinear function.
//!
//! Exact mode solves the weighted regression over every coalition and
//! returns the Shapley values themselves. Sampled mode draws complementary
//! coalition pairs; either way the values add up to `f(x) - E[f]`.
//!
//!     cargo run --release --example kernel_shap

use faithful::attribution::{kernel_shap_values, ShapConfig, ShapMode};

fn f(z: &[f64]) -> f64 {
    (z[0] * z[1] + z[2]).tanh() + 0.5 * z[2] * z[3] - 0.2 * z[3] * z[3] + z[4] * z[0]
}

fn main() -> faithful::Result<()> {
    let background: Vec<Vec<f64>> = (0..16)
        .map(|i| {
            let t = i as f64;
            vec![(0.3 * t).sin(), (0.7 * t).cos(), 0.1 * t - 0.8, (0.5 * t).sin(), (1.3 * t).cos()]
        })
        .collect();
    let x = [1.0, 0.8, -0.5, 1.5, 0.3];

    for mode in [ShapMode::Exact, ShapMode::Sampled(24), ShapMode::Sampled(2048)] {
        let v = kernel_shap_values(f, &x, &ShapConfig::new(background.clone(), mode, 7))?;
        let total: f64 = v.phi.iter().sum();
        println!(
            "{mode:?}: phi = {:.4?}\n    sum {total:.12} = f(x) - E[f] = {:.12}, {} coalitions evaluated",
            v.phi,
            v.full_value - v.base_value,
            v.evaluations
        );
    }
    Ok(())
}
