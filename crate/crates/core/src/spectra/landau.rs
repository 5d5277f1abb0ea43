//! Harmonic-oscillator level counts and Landau-level densities.

use crate::orbit::landau_frequencies;
use crate::scaling::unit_ball_volume;
use std::f64::consts::PI;

/// Levels Σ(2mⱼ+1)bⱼ ≤ `bound`, visited by a bounded lattice walk.
pub fn landau_levels(b: &[f64], bound: f64, visit: &mut impl FnMut(f64)) {
    fn walk(b: &[f64], acc: f64, bound: f64, visit: &mut impl FnMut(f64)) {
        match b.split_first() {
            None => visit(acc),
            Some((&bj, rest)) => {
                for m in 0u64.. {
                    let e = acc + (2 * m + 1) as f64 * bj;
                    if e > bound {
                        break;
                    }
                    walk(rest, e, bound, visit);
                }
            }
        }
    }
    let base: f64 = b.iter().sum();
    if base <= bound {
        walk(b, 0.0, bound, visit);
    }
}

/// #{m ∈ ℤ₊ʳ : Σ(2mⱼ+1)bⱼ + shift ≤ λ}.
pub fn harmonic_count(b: &[f64], shift: f64, lambda: f64) -> u64 {
    assert!(b.iter().all(|&v| v > 0.0), "frequencies must be positive");
    let mut n = 0;
    landau_levels(b, lambda - shift, &mut |_| n += 1);
    n
}

/// Positive frequencies of iB and the rank 2r, with closed forms for n ≤ 3.
pub fn frequencies(b: &[Vec<f64>]) -> (Vec<f64>, usize) {
    match b.len() {
        0 | 1 => (Vec::new(), 0),
        2 => {
            let f = b[0][1].abs();
            if f > 0.0 { (vec![f], 2) } else { (Vec::new(), 0) }
        }
        3 => {
            let f = (b[0][1].powi(2) + b[0][2].powi(2) + b[1][2].powi(2)).sqrt();
            if f > 0.0 { (vec![f], 2) } else { (Vec::new(), 0) }
        }
        _ => landau_frequencies(b),
    }
}

fn positive_power(a: f64, e: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else if e == 0.0 {
        1.0
    } else {
        a.powf(e)
    }
}

/// Density of states v_B(λ) of the constant-field operator with tensor B.
pub fn cdv_density(b: &[Vec<f64>], lambda: f64) -> f64 {
    let (freqs, _) = frequencies(b);
    density(b.len(), &freqs, lambda)
}

/// (2π)^{−n+r}|v_{n−2r}|·b₁⋯b_r·Σ_m(λ − Σ(2mⱼ+1)bⱼ)₊^{n/2−r}.
pub(crate) fn density(n: usize, freqs: &[f64], lambda: f64) -> f64 {
    let r = freqs.len();
    let e = n as f64 / 2.0 - r as f64;
    let pref = (2.0 * PI).powi(r as i32 - n as i32) * unit_ball_volume(n - 2 * r) * freqs.iter().product::<f64>();
    if let [b] = freqs {
        return pref * single_frequency_sum(*b, e, lambda);
    }
    let mut sum = 0.0;
    landau_levels(freqs, lambda, &mut |level| sum += positive_power(lambda - level, e));
    pref * sum
}

/// Levels beyond which the single-frequency sum is replaced by its integral.
const DIRECT_LEVELS: f64 = 1e5;

/// Σ_{m≥0}(λ − (2m+1)b)₊^e.
fn single_frequency_sum(b: f64, e: f64, lambda: f64) -> f64 {
    if lambda <= b {
        return 0.0;
    }
    // levels strictly below λ
    let k = ((lambda / b - 1.0) / 2.0).ceil();
    if e == 0.0 {
        return k;
    }
    if k > DIRECT_LEVELS {
        // midpoint rule in m, exact up to O(b^e) against a total of order λ^{e+1}/b
        let top = (lambda - 2.0 * k * b).max(0.0);
        return (lambda.powf(e + 1.0) - top.powf(e + 1.0)) / (2.0 * b * (e + 1.0));
    }
    (0..k as u64).map(|m| positive_power(lambda - (2 * m + 1) as f64 * b, e)).sum()
}

/// |v_d|·Σ_m(λ − Σ(2mⱼ+1)bⱼ)₊^{d/2}.
pub fn landau_sum(b: &[f64], d: usize, lambda: f64) -> f64 {
    let e = d as f64 / 2.0;
    let mut sum = 0.0;
    landau_levels(b, lambda, &mut |level| sum += positive_power(lambda - level, e));
    unit_ball_volume(d) * sum
}
