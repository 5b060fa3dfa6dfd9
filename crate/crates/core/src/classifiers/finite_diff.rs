use crate::domain::{check_label, Classifier, Instance};
use crate::error::{check_len, Error, Result};

/// Symmetric difference quotient `(f(x + eps e_i) - f(x - eps e_i)) / (2 eps)`
/// along every coordinate; `2k` evaluations of `f`.
pub fn symmetric_difference<F>(f: F, x: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("finite-difference step must be positive, got {eps}")));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + eps;
        let up = f(&probe);
        probe[i] = x[i] - eps;
        let down = f(&probe);
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * eps));
    }
    Ok(grad)
}

/// Finite-difference estimate of the gradient of `C_l` at `x`. Probe points
/// must stay inside the feature domains.
pub fn finite_diff_gradient<C: Classifier + ?Sized>(
    classifier: &C,
    x: &Instance,
    label: usize,
    eps: f64,
) -> Result<Vec<f64>> {
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("finite-difference step must be positive, got {eps}")));
    }
    for (i, (&v, domain)) in x.values().iter().zip(x.schema().domains()).enumerate() {
        for probe in [v - eps, v + eps] {
            if !domain.contains(probe) {
                return Err(Error::OutsideDomain { feature: i, value: probe });
            }
        }
    }
    symmetric_difference(|z| classifier.probability(z, label), x.values(), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::squared_logistic;
    use crate::domain::{sigmoid_derivative, POSITIVE};

    #[test]
    fn exact_for_quadratics() {
        let g = symmetric_difference(|x| x[0] * x[0], &[3.0], 1e-3).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn squared_logistic_derivative() {
        let c = squared_logistic();
        let x = Instance::from_values(vec![1.0]).unwrap();
        let g = finite_diff_gradient(&c, &x, POSITIVE, 1e-5).unwrap();
        let analytic = 2.0 * sigmoid_derivative(1.0);
        assert!((g[0] - analytic).abs() < 1e-9);
        assert!((g[0] - 0.39322).abs() < 1e-5);
    }

    #[test]
    fn rejects_non_positive_step() {
        assert!(symmetric_difference(|x| x[0], &[0.0], 0.0).is_err());
        assert!(symmetric_difference(|x| x[0], &[0.0], -1.0).is_err());
    }
}
