//! The first-order remainder `C(x + h u) - C(x) - h u.s` shrinks faster
//! than `h` only when `s` is the gradient.
//!
//!     cargo run --release --example error_decay

use faithful::attribution::gradient_scores;
use faithful::classifiers::{Activation, MlpModel};
use faithful::faithfulness::{error_decay, error_dominance};
use faithful::{Instance, POSITIVE};

fn main() -> faithful::Result<()> {
    let model = MlpModel::random(3, &[6, 6], Activation::Tanh, 5)?;
    let x = Instance::from_values(vec![0.3, -0.4, 0.8])?;
    let direction = [1.0, 2.0, -1.0];
    let grad = gradient_scores(&model, &x, POSITIVE, None)?;
    let nudged: Vec<f64> = grad.scores().iter().map(|g| g + 0.1).collect();

    for (name, s) in [("gradient", grad.scores()), ("gradient + 0.1", &nudged)] {
        let r = error_decay(&model, s, &x, POSITIVE, &direction, 0.5, 10)?;
        let shown: Vec<String> = r.ratios.iter().map(|v| format!("{v:.1e}")).collect();
        println!("{name}: e(h)/h = {}\n  -> {}", shown.join(" "), if r.passed { "PASS" } else { "FAIL" });
    }

    let d = error_dominance(&model, grad.scores(), &nudged, &x, POSITIVE, &direction, 0.5, 10)?;
    println!(
        "\ne_grad / e_nudged from {:.3} down to {:.1e}",
        d.ratios[0],
        d.ratios[d.ratios.len() - 1]
    );
    Ok(())
}
