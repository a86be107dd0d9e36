//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use leafsynth::LabelMap;

/// Pixel indices of every nonzero id, ascending by id.
pub fn masks(m: &LabelMap) -> Vec<(u16, Vec<usize>)> {
    let mut ids: Vec<u16> = m.labels.iter().copied().filter(|&l| l != 0).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| (id, m.labels.iter().enumerate().filter(|(_, &l)| l == id).map(|(i, _)| i).collect()))
        .collect()
}

/// Dice of two pixel sets by direct intersection.
pub fn set_dice(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.iter().filter(|p| b.contains(p)).count();
    2.0 * inter as f64 / (a.len() + b.len()) as f64
}

/// Mean over `from` instances of the max Dice over all `to` instances,
/// computed pair by pair.
pub fn brute_best_dice(from: &LabelMap, to: &LabelMap) -> f64 {
    let f = masks(from);
    let t = masks(to);
    if f.is_empty() {
        return 1.0;
    }
    let mut total = 0.0;
    for (_, a) in &f {
        let mut best = 0.0f64;
        for (_, b) in &t {
            best = best.max(set_dice(a, b));
        }
        total += best;
    }
    total / f.len() as f64
}

pub fn brute_sbd(gt: &LabelMap, pred: &LabelMap) -> f64 {
    brute_best_dice(gt, pred).min(brute_best_dice(pred, gt))
}

/// Simpson's rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Mean of round(X) for X normal(mean, sd) truncated to [lo, hi], by numeric
/// integration of the density over each rounding bin.
pub fn rounded_truncated_normal_mean(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let pdf = |x: f64| (-(x - mean).powi(2) / (2.0 * sd * sd)).exp();
    let z = simpson(pdf, lo, hi, 20_000);
    let mut m = 0.0;
    let (k0, k1) = (lo.round() as i64, hi.round() as i64);
    for k in k0..=k1 {
        let a = (k as f64 - 0.5).max(lo);
        let b = (k as f64 + 0.5).min(hi);
        if b > a {
            m += k as f64 * simpson(pdf, a, b, 2_000) / z;
        }
    }
    m
}

/// Same quantity as [`rounded_truncated_normal_mean`], from closed-form
/// normal CDF differences instead of quadrature.
pub fn rounded_truncated_normal_mean_cdf(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::new(mean, sd).unwrap();
    let z = n.cdf(hi) - n.cdf(lo);
    (lo.round() as i64..=hi.round() as i64)
        .map(|k| {
            let a = (k as f64 - 0.5).max(lo);
            let b = (k as f64 + 0.5).min(hi);
            if b > a { k as f64 * (n.cdf(b) - n.cdf(a)) / z } else { 0.0 }
        })
        .sum()
}

/// Upper `alpha` critical value of the chi-square distribution.
pub fn chi_square_critical(dof: f64, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - alpha)
}
