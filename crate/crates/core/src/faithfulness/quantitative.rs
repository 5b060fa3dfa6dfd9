use crate::domain::{check_label, Classifier, Instance};
use crate::error::{check_len, Error, Result};

/// `|e(h)| / |h|` must fall below this before the decay rule applies.
pub const ASYMPTOTIC_GATE: f64 = 0.1;
/// Minimum shrink factor of `|e(h)| / |h|` per halving of `h`.
pub const DECAY_FACTOR: f64 = 1.5;
/// Absolute remainders this small are treated as converged; below it the
/// remainder is dominated by rounding in `C_l`.
const ERROR_FLOOR: f64 = 1e-13;
/// Fewest consecutive decaying levels that count as a pass.
const MIN_TAIL: usize = 3;

/// Normalizes `direction`; the zero vector is rejected.
pub fn unit_direction(direction: &[f64]) -> Result<Vec<f64>> {
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::config("probe direction must be a nonzero finite vector"));
    }
    Ok(direction.iter().map(|v| v / norm).collect())
}

fn check_inside(x: &Instance, z: &[f64]) -> Result<()> {
    for (i, (v, d)) in z.iter().zip(x.schema().domains()).enumerate() {
        if !d.contains(*v) {
            return Err(Error::OutsideDomain { feature: i, value: *v });
        }
    }
    Ok(())
}

/// First-order remainder `e(h) = C_l(x + h) - C_l(x) - h . scores`.
pub fn quantitative_error<C: Classifier + ?Sized>(
    classifier: &C,
    scores: &[f64],
    x: &Instance,
    label: usize,
    h: &[f64],
) -> Result<f64> {
    check_label(label)?;
    check_len(classifier.num_features(), x.len())?;
    check_len(x.len(), scores.len())?;
    check_len(x.len(), h.len())?;
    let moved: Vec<f64> = x.values().iter().zip(h).map(|(a, b)| a + b).collect();
    check_inside(x, &moved)?;
    let linear: f64 = h.iter().zip(scores).map(|(a, b)| a * b).sum();
    Ok(classifier.probability(&moved, label) - classifier.probability(x.values(), label) - linear)
}

fn halving_steps(h0: f64, levels: usize) -> Result<Vec<f64>> {
    if levels < 3 {
        return Err(Error::config(format!("need at least 3 levels, got {levels}")));
    }
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::config(format!("initial step must be positive, got {h0}")));
    }
    Ok((0..levels).map(|m| h0 / 2f64.powi(m as i32)).collect())
}

fn errors_along<C: Classifier + ?Sized>(
    classifier: &C,
    scores: &[f64],
    x: &Instance,
    label: usize,
    u: &[f64],
    steps: &[f64],
) -> Result<Vec<f64>> {
    steps
        .iter()
        .map(|&t| {
            let h: Vec<f64> = u.iter().map(|v| v * t).collect();
            quantitative_error(classifier, scores, x, label, &h)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecayRecord {
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// `e(h_m) / |h_m|`.
    pub ratios: Vec<f64>,
    pub direction: Vec<f64>,
    pub passed: bool,
}

/// Remainders along `h_m = h0 / 2^m * direction` for `m = 0..levels`.
///
/// Passes when the ratio sequence ends in a run of at least three levels,
/// starting below the asymptotic gate, in which each `|ratio|` is at most
/// `1 / 1.5` of its predecessor (or the remainder has reached rounding
/// level). A ratio that levels off at a nonzero constant fails.
pub fn error_decay<C: Classifier + ?Sized>(
    classifier: &C,
    scores: &[f64],
    x: &Instance,
    label: usize,
    direction: &[f64],
    h0: f64,
    levels: usize,
) -> Result<ErrorDecayRecord> {
    check_len(x.len(), direction.len())?;
    let u = unit_direction(direction)?;
    let steps = halving_steps(h0, levels)?;
    let errors = errors_along(classifier, scores, x, label, &u, &steps)?;
    let ratios: Vec<f64> = errors.iter().zip(&steps).map(|(e, h)| e / h).collect();
    let passed = decays(&errors, &ratios);
    Ok(ErrorDecayRecord {
        step_sizes: steps,
        errors,
        ratios,
        direction: u,
        passed,
    })
}

fn decays(errors: &[f64], ratios: &[f64]) -> bool {
    let n = ratios.len();
    let mut start = n - 1;
    while start > 0 {
        let prev = ratios[start - 1].abs();
        let next = ratios[start].abs();
        let shrinking = next * DECAY_FACTOR <= prev || errors[start].abs() <= ERROR_FLOOR;
        if !shrinking {
            break;
        }
        start -= 1;
    }
    // Skip levels before the gate.
    while start < n && ratios[start].abs() >= ASYMPTOTIC_GATE {
        start += 1;
    }
    n - start >= MIN_TAIL
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceRecord {
    pub step_sizes: Vec<f64>,
    /// `e_g(h_m) / e_s(h_m)`.
    pub ratios: Vec<f64>,
    pub passed: bool,
}

/// Ratio of the remainders of `scores_g` and `scores_s` along halving steps.
///
/// When `scores_g` is the gradient and `scores_s` differs from it along
/// `direction`, `e_g` is second order while `e_s` is first order, so the
/// ratio tends to 0. Passes when the final `|ratio|` is below both the first
/// and 0.1.
#[allow(clippy::too_many_arguments)]
pub fn error_dominance<C: Classifier + ?Sized>(
    classifier: &C,
    scores_g: &[f64],
    scores_s: &[f64],
    x: &Instance,
    label: usize,
    direction: &[f64],
    h0: f64,
    levels: usize,
) -> Result<DominanceRecord> {
    check_len(x.len(), direction.len())?;
    check_len(scores_g.len(), scores_s.len())?;
    let u = unit_direction(direction)?;
    let gap: f64 = scores_s
        .iter()
        .zip(scores_g)
        .zip(&u)
        .map(|((s, g), d)| (s - g) * d)
        .sum();
    if gap.abs() <= 1e-9 {
        return Err(Error::Undefined(format!(
            "scores agree along the direction (difference {gap:e}); the ratio is 0/0"
        )));
    }
    let steps = halving_steps(h0, levels)?;
    let eg = errors_along(classifier, scores_g, x, label, &u, &steps)?;
    let es = errors_along(classifier, scores_s, x, label, &u, &steps)?;
    let ratios: Vec<f64> = eg.iter().zip(&es).map(|(a, b)| a / b).collect();
    let first = ratios[0].abs();
    let last = ratios[ratios.len() - 1].abs();
    Ok(DominanceRecord {
        step_sizes: steps,
        passed: last < first && last < ASYMPTOTIC_GATE,
        ratios,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignAgreement {
    pub agree: Vec<bool>,
    pub fraction: f64,
}

/// Per feature: a positive `a_i` needs `b_i >= 0`, a negative `a_i` needs
/// `b_i <= 0`; a zero `a_i` always agrees.
pub fn sign_agreement(a: &[f64], b: &[f64]) -> Result<SignAgreement> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::config("cannot compare empty score vectors"));
    }
    let agree: Vec<bool> = a
        .iter()
        .zip(b)
        .map(|(x, y)| !((*x > 0.0 && *y < 0.0) || (*x < 0.0 && *y > 0.0)))
        .collect();
    let fraction = agree.iter().filter(|v| **v).count() as f64 / agree.len() as f64;
    Ok(SignAgreement { agree, fraction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{squared_logistic, FnClassifier, MlpModel, Activation};
    use crate::domain::{sigmoid, sigmoid_derivative, POSITIVE};

    fn point(v: Vec<f64>) -> Instance {
        Instance::from_values(v).unwrap()
    }

    #[test]
    fn remainder_at_one() {
        let c = squared_logistic();
        let g = 2.0 * sigmoid_derivative(1.0);
        let e = quantitative_error(&c, &[g], &point(vec![1.0]), POSITIVE, &[0.1]).unwrap();
        let expected = sigmoid(1.21) - sigmoid(1.0) - 0.1 * g;
        assert_eq!(e, expected);
        assert!((e + 8.2e-5).abs() < 1e-6, "{e}");
    }

    #[test]
    fn zero_step_and_constant_classifier() {
        let c = squared_logistic();
        assert_eq!(quantitative_error(&c, &[0.3], &point(vec![0.4]), POSITIVE, &[0.0]).unwrap(), 0.0);
        let k = FnClassifier::constant(2, -0.7);
        let e = quantitative_error(&k, &[0.0, 0.0], &point(vec![1.0, 2.0]), POSITIVE, &[3.0, -1.0]);
        assert_eq!(e.unwrap(), 0.0);
    }

    #[test]
    fn gradient_decays_and_offset_does_not() {
        let m = MlpModel::random(3, &[8, 8], Activation::Tanh, 21).unwrap();
        let x = point(vec![0.3, -0.2, 0.5]);
        let g = m.gradient(x.values(), POSITIVE).unwrap();
        let u = [0.6, 0.0, 0.8];
        let ok = error_decay(&m, &g, &x, POSITIVE, &u, 0.5, 16).unwrap();
        assert!(ok.passed, "{:?}", ok.ratios);
        let off: Vec<f64> = g.iter().zip(&u).map(|(a, b)| a + 0.5 * b).collect();
        let bad = error_decay(&m, &off, &x, POSITIVE, &u, 0.5, 16).unwrap();
        assert!(!bad.passed);
        assert!((bad.ratios.last().unwrap() + 0.5).abs() < 1e-3);
    }

    #[test]
    fn affine_target_has_zero_remainder() {
        // Exactly linear in probability space.
        let c = FnClassifier::new(2, |z| {
            let p = 0.5 + 0.1 * z[0] - 0.05 * z[1];
            (p / (1.0 - p)).ln()
        });
        let x = point(vec![0.1, 0.2]);
        let r = error_decay(&c, &[0.1, -0.05], &x, POSITIVE, &[1.0, 1.0], 0.25, 5).unwrap();
        assert!(r.errors.iter().all(|e| e.abs() < 1e-15));
        assert!(r.passed);
    }

    #[test]
    fn dominance_tends_to_zero() {
        let m = MlpModel::random(2, &[8], Activation::Tanh, 4).unwrap();
        let x = point(vec![-0.4, 0.9]);
        let g = m.gradient(x.values(), POSITIVE).unwrap();
        let s: Vec<f64> = g.iter().map(|v| v + 0.5).collect();
        let d = error_dominance(&m, &g, &s, &x, POSITIVE, &[1.0, 1.0], 0.5, 14).unwrap();
        assert!(d.passed, "{:?}", d.ratios);
        assert!(matches!(
            error_dominance(&m, &g, &g, &x, POSITIVE, &[1.0, 1.0], 0.5, 14),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn zero_direction_rejected() {
        let c = squared_logistic();
        assert!(error_decay(&c, &[1.0], &point(vec![0.0]), POSITIVE, &[0.0], 0.1, 5).is_err());
    }

    #[test]
    fn sign_rules() {
        let a = [1.0, -1.0, 0.0, 2.0];
        let b = [0.0, 0.0, -3.0, -1.0];
        let s = sign_agreement(&a, &b).unwrap();
        assert_eq!(s.agree, vec![true, true, true, false]);
        assert_eq!(s.fraction, 0.75);
        assert_eq!(sign_agreement(&a, &a).unwrap().fraction, 1.0);
        assert!(sign_agreement(&a, &b[..2]).is_err());
    }
}
