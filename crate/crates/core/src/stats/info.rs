//! Entropy, mutual information and divergence of empirical distributions.
//! All logarithms are natural.

use std::collections::BTreeMap;

use crate::descriptors::DescriptorKey;
use crate::error::{Error, Result};
use crate::stats::{EmpiricalDistribution, JointDistribution};

fn entropy_of_counts(counts: impl IntoIterator<Item = u64>, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    -counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

pub fn shannon_entropy(p: &EmpiricalDistribution) -> f64 {
    entropy_of_counts(p.counts().values().copied(), p.total()).max(0.0)
}

/// Entropy divided by `ln(total)`, so that a distribution with every root
/// in its own class scores 1. A single root scores 0.
pub fn scaled_entropy(p: &EmpiricalDistribution) -> f64 {
    if p.total() <= 1 {
        return 0.0;
    }
    (shannon_entropy(p) / (p.total() as f64).ln()).clamp(0.0, 1.0)
}

pub fn mutual_information(j: &JointDistribution) -> f64 {
    let total = j.total();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mx = j.marginal_x();
    let my = j.marginal_y();
    let mut sum = 0.0;
    for ((x, y), &c) in j.counts() {
        if c == 0 {
            continue;
        }
        let pxy = c as f64 / n;
        let px = mx[x] as f64 / n;
        let py = my[y] as f64 / n;
        sum += pxy * (pxy / (px * py)).ln();
    }
    let hx = entropy_of_counts(mx.values().copied(), total);
    let hy = entropy_of_counts(my.values().copied(), total);
    sum.clamp(0.0, hx.min(hy).max(0.0))
}

/// U(X|Y) = I(X;Y) / H(X), where X is the first component of the joint.
pub fn uncertainty_coefficient(j: &JointDistribution) -> Result<f64> {
    let hx = entropy_of_counts(j.marginal_x().values().copied(), j.total());
    if hx <= 0.0 {
        return Err(Error::UndefinedUncertainty);
    }
    Ok((mutual_information(j) / hx).clamp(0.0, 1.0))
}

/// D(P‖Q) + D(Q‖P), dropping every term in which either probability is zero.
pub fn symmetrized_kl(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64> {
    symmetrized_kl_smoothed(p, q, 0.0)
}

/// As [`symmetrized_kl`], with add-`alpha` smoothing over the union of the
/// two supports when `alpha > 0`.
pub fn symmetrized_kl_smoothed(p: &EmpiricalDistribution, q: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    p.check_compatible(q)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("smoothing constant {alpha} must be ≥ 0")));
    }
    let keys: std::collections::BTreeSet<&DescriptorKey> = p.counts().keys().chain(q.counts().keys()).collect();
    let k = keys.len() as f64;
    let np = p.total() as f64 + alpha * k;
    let nq = q.total() as f64 + alpha * k;
    if np == 0.0 || nq == 0.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for key in keys {
        let a = (p.count(key) as f64 + alpha) / np;
        let b = (q.count(key) as f64 + alpha) / nq;
        if a > 0.0 && b > 0.0 {
            sum += (a - b) * (a / b).ln();
        }
    }
    Ok(sum.max(0.0))
}

pub fn standard_error(p: f64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / total as f64).max(0.0).sqrt()
}

/// Binomial standard error of every class frequency.
pub fn frequency_standard_error(p: &EmpiricalDistribution) -> BTreeMap<DescriptorKey, f64> {
    p.counts()
        .keys()
        .map(|k| (k.clone(), standard_error(p.frequency(k), p.total())))
        .collect()
}
