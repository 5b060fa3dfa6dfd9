//! Weighted ridge least squares via the normal equations.
//!
//! Shared by the LIME, SILO and Kernel SHAP surrogates. The systems are
//! small (one unknown per feature plus an optional intercept), so the
//! normal equations are accumulated directly and solved by Cholesky.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Coefficients of a fitted affine model `y ~ intercept + coefficients . x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

/// Relative pivot size below which an unregularized system counts as singular.
const PIVOT_FLOOR: f64 = 1e-13;

/// Minimizes `sum_j w_j (y_j - b - c . x_j)^2 + ridge * |c|^2`.
///
/// The intercept `b` is never penalized. With `fit_intercept = false` the
/// intercept is fixed at zero. A rank-deficient system is an error only
/// when `ridge == 0`.
pub fn weighted_ridge(
    rows: &[Vec<f64>],
    targets: &[f64],
    weights: &[f64],
    ridge: f64,
    fit_intercept: bool,
) -> Result<LinearFit> {
    check_len(rows.len(), targets.len())?;
    check_len(rows.len(), weights.len())?;
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::config(format!("ridge strength must be >= 0, got {ridge}")));
    }
    let k = match rows.first() {
        Some(r) => r.len(),
        None => return Err(Error::data("weighted least squares needs at least one row")),
    };
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::config("sample weights must be finite and non-negative"));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Singular("all sample weights are zero".into()));
    }

    let offset = usize::from(fit_intercept);
    let p = k + offset;
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut design = vec![0.0; p];
    for ((row, &y), &w) in rows.iter().zip(targets).zip(weights) {
        check_len(k, row.len())?;
        if w == 0.0 {
            continue;
        }
        if fit_intercept {
            design[0] = 1.0;
        }
        design[offset..].copy_from_slice(row);
        for a in 0..p {
            let wa = w * design[a];
            rhs[a] += wa * y;
            for b in a..p {
                gram[(a, b)] += wa * design[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    for a in offset..p {
        gram[(a, a)] += ridge;
    }

    let solution = solve_spd(gram, rhs, ridge > 0.0)?;
    let intercept = if fit_intercept { solution[0] } else { 0.0 };
    let coefficients = solution.iter().skip(offset).copied().collect::<Vec<_>>();
    if coefficients.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
        return Err(Error::Numerical("least-squares solution is not finite".into()));
    }
    Ok(LinearFit {
        intercept,
        coefficients,
    })
}

fn solve_spd(gram: DMatrix<f64>, rhs: DVector<f64>, regularized: bool) -> Result<DVector<f64>> {
    let scale = gram.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Singular("normal equations are identically zero".into()));
    }
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let min_pivot = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if regularized || min_pivot > PIVOT_FLOOR * scale {
            return Ok(chol.solve(&rhs));
        }
        return Err(Error::Singular(format!(
            "pivot {min_pivot:e} below tolerance; supply a positive ridge strength"
        )));
    }
    if regularized {
        if let Some(sol) = gram.lu().solve(&rhs) {
            return Ok(sol);
        }
    }
    Err(Error::Singular(
        "normal equations are not positive definite; supply a positive ridge strength".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_affine_target() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64 * 0.3 - 2.0, ((i * 7) % 5) as f64])
            .collect();
        let targets: Vec<f64> = rows.iter().map(|r| 1.5 + 2.0 * r[0] - 0.5 * r[1]).collect();
        let weights: Vec<f64> = (0..20).map(|i| 1.0 + (i % 3) as f64).collect();
        let fit = weighted_ridge(&rows, &targets, &weights, 0.0, true).unwrap();
        assert!((fit.intercept - 1.5).abs() < 1e-10);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((fit.coefficients[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn collinear_design_is_singular_without_ridge() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let targets: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let weights = vec![1.0; 10];
        assert!(matches!(
            weighted_ridge(&rows, &targets, &weights, 0.0, true),
            Err(Error::Singular(_))
        ));
        let fit = weighted_ridge(&rows, &targets, &weights, 1e-3, true).unwrap();
        assert!(fit.coefficients.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn zero_weights_rejected() {
        let rows = vec![vec![1.0], vec![2.0]];
        assert!(weighted_ridge(&rows, &[1.0, 2.0], &[0.0, 0.0], 1.0, true).is_err());
    }

    #[test]
    fn ridge_shrinks_coefficients() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 - 4.5]).collect();
        let targets: Vec<f64> = rows.iter().map(|r| 3.0 * r[0]).collect();
        let w = vec![1.0; 10];
        let loose = weighted_ridge(&rows, &targets, &w, 0.0, true).unwrap();
        let tight = weighted_ridge(&rows, &targets, &w, 100.0, true).unwrap();
        assert!(tight.coefficients[0].abs() < loose.coefficients[0].abs());
    }
}
