//! Rank agreement between attribution methods and per-explanation timing.

mod tables;

pub use tables::{FidelityRow, FidelityTable, RuntimeRow, RuntimeTable};

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};

/// Fractional ranks starting at 1; tied values share their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    if a.len() < 2 {
        return Err(Error::Undefined("rank correlation needs at least two values".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Undefined("rank correlation of NaN values".into()));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let mean = (a.len() as f64 + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Undefined("rank correlation with a constant vector".into()));
    }
    if ra == rb {
        return Ok(1.0);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Mean rank correlation over instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    pub mean_rho: f64,
    /// Instances that entered the mean.
    pub instances: usize,
    /// Instances skipped because one of the vectors was constant.
    pub excluded: usize,
}

/// Average Spearman rho between paired per-instance score vectors.
/// Pairs where either vector is constant are excluded and counted.
pub fn fidelity_vs_reference(reference: &[Vec<f64>], method: &[Vec<f64>]) -> Result<Fidelity> {
    check_len(reference.len(), method.len())?;
    let rhos: Vec<Option<f64>> = reference
        .par_iter()
        .zip(method)
        .map(|(r, m)| match spearman_rho(r, m) {
            Ok(rho) => Ok(Some(rho)),
            Err(Error::Undefined(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = rhos.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(Error::Undefined("no instance has a defined rank correlation".into()));
    }
    Ok(Fidelity {
        mean_rho: used.iter().sum::<f64>() / used.len() as f64,
        instances: used.len(),
        excluded: rhos.len() - used.len(),
    })
}

/// Mean wall-clock time of one call of `explain`, in milliseconds.
///
/// One untimed warm-up call on the first instance precedes
/// `repetitions` timed passes over all instances. Runs on the calling
/// thread only.
pub fn runtime_bench<T, F>(instances: &[T], repetitions: usize, mut explain: F) -> Result<f64>
where
    F: FnMut(usize, &T) -> Result<()>,
{
    if repetitions < 3 {
        return Err(Error::config(format!("need at least 3 repetitions, got {repetitions}")));
    }
    if instances.is_empty() {
        return Err(Error::config("nothing to time: no instances"));
    }
    explain(0, &instances[0])?;
    let mut total = Duration::ZERO;
    for _ in 0..repetitions {
        for (i, x) in instances.iter().enumerate() {
            let start = Instant::now();
            explain(i, x)?;
            total += start.elapsed();
        }
    }
    let calls = (repetitions * instances.len()) as f64;
    let total = total.max(Duration::from_nanos(1));
    Ok(total.as_secs_f64() * 1e3 / calls)
}
