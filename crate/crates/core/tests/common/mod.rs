#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

/// Exact cup density `∝ exp(β r(s, θ))` on a midpoint grid of `[0, π/2]`.
pub fn cup_density(angle: f64, beta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = FRAC_PI_2 / n as f64;
    let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let r: Vec<f64> = s
        .iter()
        .map(|s| angle.cos() * -5.0 * (s + 1.0) + angle.sin() * -(FRAC_PI_2 - s))
        .collect();
    let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = r.iter().map(|r| (beta * (r - max)).exp()).collect();
    let total: f64 = w.iter().sum();
    (s, w.into_iter().map(|w| w / total).collect())
}

/// Inner edges of `bins` equal-probability bins of a gridded density.
pub fn quantile_edges(s: &[f64], p: &[f64], bins: usize) -> Vec<f64> {
    let mut edges = Vec::new();
    let mut acc = 0.0;
    let mut next = 1;
    for (x, w) in s.iter().zip(p) {
        acc += w;
        while next < bins && acc >= next as f64 / bins as f64 {
            edges.push(*x);
            next += 1;
        }
    }
    edges
}

/// Total variation between the empirical bin frequencies of `draws` and
/// the uniform bin masses implied by `edges`.
pub fn binned_tv(draws: &[f64], edges: &[f64]) -> f64 {
    let bins = edges.len() + 1;
    let mut counts = vec![0usize; bins];
    for x in draws {
        counts[edges.partition_point(|e| e < x)] += 1;
    }
    let n = draws.len() as f64;
    0.5 * counts.iter().map(|c| (*c as f64 / n - 1.0 / bins as f64).abs()).sum::<f64>()
}

/// Posterior probability of the first of two hypotheses given their
/// log-likelihoods.
pub fn two_way_posterior(l0: f64, l1: f64) -> f64 {
    1.0 / (1.0 + (l1 - l0).exp())
}
