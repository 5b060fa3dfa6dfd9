//! Backpropagated gradients against symmetric differences on random
//! networks.
//!
//!     cargo run --release --example mlp_gradient_check

use faithful::classifiers::{finite_diff_gradient, mlp_gradient, Activation, MlpModel};
use faithful::{Instance, POSITIVE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> faithful::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for activation in [Activation::Tanh, Activation::Logistic, Activation::Relu] {
        let mut worst = 0.0_f64;
        for seed in 0..100 {
            let k = rng.random_range(2..8);
            let model = MlpModel::random(k, &[8, 8, 8], activation, seed)?;
            let x = Instance::from_values((0..k).map(|_| rng.random_range(-2.0..2.0)).collect())?;
            let analytic = mlp_gradient(&model, &x, POSITIVE)?;
            let numeric = finite_diff_gradient(&model, &x, POSITIVE, 1e-5)?;
            for (a, n) in analytic.iter().zip(&numeric) {
                worst = worst.max((a - n).abs());
            }
        }
        println!("{:<8} max |backprop - finite difference| = {worst:.2e}", activation.name());
    }
    Ok(())
}
