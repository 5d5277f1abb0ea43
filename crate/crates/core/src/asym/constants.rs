//! Special constants of the asymptotic laws: odd-integer power sums, the inhomogeneous
//! κ(H), the strong-chain prefactor and the three-dimensional series.

use super::AsymError;
use crate::exact::{q, q_from_f64};
use crate::liealg::SchrodingerSpec;
use crate::poly::{Mono, MultiPoly};
use crate::spectra::quad::{adaptive, adaptive_half_line, Tolerance};
use crate::spectra::{count_1d, count_nd_direct, eigenvalues_1d, DirectFlag, GridND, Grid1D};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::cell::RefCell;
use std::f64::consts::PI;

/// Σ_{j≥0} (2j+1)^{−s} for s > 1: partial sums closed by an Euler–Maclaurin tail.
pub fn odd_power_sum(s: f64, tol: f64) -> f64 {
    assert!(s > 1.0, "odd power sum diverges for s = {s}");
    let f = |t: f64| (2.0 * t + 1.0).powf(-s);
    let mut j = 16usize;
    loop {
        let x = j as f64;
        let u = 2.0 * x + 1.0;
        // f'(x) and f'''(x) of (2x+1)^{−s}
        let d1 = -2.0 * s * u.powf(-s - 1.0);
        let d3 = -8.0 * s * (s + 1.0) * (s + 2.0) * u.powf(-s - 3.0);
        let d5 = -32.0 * s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * u.powf(-s - 5.0);
        if d5.abs() / 30240.0 <= tol * 1e-2 || j >= 1 << 24 {
            let head: f64 = (0..j).rev().map(|i| f(i as f64)).sum();
            let integral = u.powf(1.0 - s) / (2.0 * (s - 1.0));
            return head + integral + 0.5 * f(x) - d1 / 12.0 + d3 / 720.0;
        }
        j *= 2;
    }
}

/// Σ_{j≥0} (2j+1)^{−1−1/k}.
pub fn series_constant(k: u32, tol: f64) -> f64 {
    assert!(k >= 1, "k must be positive");
    odd_power_sum(1.0 + 1.0 / k as f64, tol)
}

/// Σⱼ Eⱼ^{−s} over the eigenvalues of −d²/dz² + W, with the levels above the cutoff
/// estimated from a linear counting function.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LevelSum {
    pub value: f64,
    pub tail: f64,
}

/// Cutoff above the ground level, as a multiple of it.
const LEVEL_CUTOFF: f64 = 16.0;

pub(crate) fn level_power_sum(w: &MultiPoly, s: f64, refine: f64) -> Result<LevelSum, AsymError> {
    let mut bound = 1.0;
    let ground = loop {
        let grid = Grid1D::auto(w, bound, refine)?;
        if let Some(&e) = eigenvalues_1d(w, bound, &grid)?.first() {
            break e;
        }
        bound *= 2.0;
        if bound > 1e12 {
            return Err(AsymError::InvalidInput(format!("no level of {w} below 1e12")));
        }
    };
    let cutoff = LEVEL_CUTOFF * ground.max(f64::MIN_POSITIVE);
    let grid = Grid1D::auto(w, cutoff, refine)?;
    let levels = eigenvalues_1d(w, cutoff, &grid)?;
    let value = levels.iter().rev().map(|e| e.powf(-s)).sum();
    let tail = levels.len() as f64 * cutoff.powf(-s) / (s - 1.0).max(0.5);
    Ok(LevelSum { value, tail })
}

/// (z² + b)².
fn double_well(b: f64) -> MultiPoly {
    let inner = MultiPoly::monomial(Mono(vec![2]), q(1)).add(&MultiPoly::constant(1, q_from_f64(b)));
    inner.mul(&inner)
}

/// (t^{p+1} + η)².
fn chain_potential(p: u32, eta: f64) -> MultiPoly {
    let inner = MultiPoly::monomial(Mono(vec![p + 1]), q(1)).add(&MultiPoly::constant(1, q_from_f64(eta)));
    inner.mul(&inner)
}

/// N(1, −d²/dz² + (√a z² + b)²) through the Sturm count.
pub fn kappa_inhomog_integrand(a: f64, b: f64) -> Result<usize, AsymError> {
    let inner = MultiPoly::monomial(Mono(vec![2]), q_from_f64(a.sqrt())).add(&MultiPoly::constant(1, q_from_f64(b)));
    let w = inner.mul(&inner);
    if a == 0.0 {
        // no confinement; only reachable when b² < 1 and then the count is infinite
        return if b * b >= 1.0 { Ok(0) } else { Err(AsymError::InvalidInput("a = 0 with |b| < 1".into())) };
    }
    let grid = Grid1D::auto(&w, 1.0, 1.0)?;
    Ok(count_1d(&w, 1.0, &grid)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InhomogeneousKappa {
    pub value: f64,
    /// Larger of the quadrature estimate and the change under halving the tolerance.
    pub error: f64,
    /// Result at the requested tolerance, before halving.
    pub coarse: f64,
    pub tolerance: f64,
    /// Integration range in b after the change of variables; tails beyond are asymptotic.
    pub b_range: (f64, f64),
    pub evals: usize,
}

struct Pass {
    value: f64,
    error: f64,
    evals: usize,
    range: (f64, f64),
}

/// Depth of the double-well range before the harmonic tail takes over.
const WELL_DEPTH: f64 = 256.0;
const B_UPPER: f64 = 8.0;

fn inhomog_pass(tol: f64) -> Result<Pass, AsymError> {
    let s = 3.5;
    let refine = 1.5 * (1e-2 / tol).sqrt().max(1.0);
    let odd = odd_power_sum(s, 1e-12);
    // both wells at ±√β carry levels (2j+1)·2√β
    let asym = |beta: f64| 2.0 * (2.0 * beta.sqrt()).powf(-s) * odd;
    let failure = RefCell::new(None);
    let integrand = |b: f64| match level_power_sum(&double_well(b), s, refine) {
        Ok(l) => l.value + l.tail,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let r = adaptive(integrand, -WELL_DEPTH, B_UPPER, Tolerance::new(0.0, tol / 8.0));
    let edge_lo = integrand(-WELL_DEPTH);
    let edge_hi = integrand(B_UPPER);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    // ∫_{β>B} 2(2√β)^{−s}·odd dβ, rescaled by the mismatch at the junction
    let match_ratio = edge_lo / asym(WELL_DEPTH);
    let tail_lo = 2.0 * 2f64.powf(-s) * odd * WELL_DEPTH.powf(1.0 - s / 2.0) / (s / 2.0 - 1.0);
    // above B_UPPER the spectrum sits beyond b², so the integrand falls like b^{−2s}
    let tail_hi = edge_hi * B_UPPER / (2.0 * s - 1.0);
    let scale = 6.0 / (7.0 * PI);
    Ok(Pass {
        value: scale * (r.value + match_ratio * tail_lo + tail_hi),
        error: scale * (r.error + (match_ratio - 1.0).abs() * tail_lo + tail_hi),
        evals: r.evals,
        range: (-WELL_DEPTH, B_UPPER),
    })
}

/// κ(H) = π⁻¹∫₀^∞da∫db N(1, −d²/dz² + (√a z² + b)²), evaluated as
/// (6/7π)∫db Σⱼ Eⱼ(b)^{−7/2} over the levels of −d²/dz² + (z² + b)², and repeated
/// at half the tolerance.
pub fn kappa_inhomog(tol: f64) -> Result<InhomogeneousKappa, AsymError> {
    if !(tol >= 1e-3) {
        return Err(AsymError::InvalidInput(format!("tolerance {tol} below 1e-3")));
    }
    let coarse = inhomog_pass(tol)?;
    let fine = inhomog_pass(tol / 2.0)?;
    let change = (fine.value - coarse.value).abs();
    if change > tol * fine.value.abs() {
        return Err(AsymError::NonConvergent { value: fine.value, error: change });
    }
    Ok(InhomogeneousKappa {
        value: fine.value,
        error: change.max(fine.error),
        coarse: coarse.value,
        tolerance: tol,
        b_range: fine.range,
        evals: coarse.evals + fine.evals,
    })
}

/// Prefactor K of ∫N(λ, −d²/dy² + (x₂^q y^{p+1}/(p+1) + ξ₂)²) dξ₂dx₂/(2π) = K·λ^{(p+q+2)/(2q)}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongConstant {
    pub value: f64,
    pub error: f64,
    pub exponent: f64,
    pub eta_range: f64,
    pub evals: usize,
}

const ETA_RANGE: f64 = 64.0;

/// After t = |c|^{1/(p+2)}y the ξ₂ integral becomes ∫dη N(μ, −d² + (t^{p+1} + η)²) and the
/// remaining integrals collapse to Σⱼ∫dη Eⱼ(η)^{−s}/s with s = (p+2)/(2q) + 1/2.
pub fn strong_constant(p: u32, q_: u32, tol: f64) -> Result<StrongConstant, AsymError> {
    if p == 0 || q_ == 0 {
        return Err(AsymError::InvalidInput(format!("strong chain needs p, q ≥ 1, got ({p}, {q_})")));
    }
    let (pf, qf) = (p as f64, q_ as f64);
    let s = (pf + 2.0) / (2.0 * qf) + 0.5;
    // far from the origin the wells are harmonic with ω = (p+1)|η|^{p/(p+1)}
    let decay = s * pf / (pf + 1.0);
    if decay <= 1.0 {
        return Err(AsymError::TailBoundFailure { exponent: -decay });
    }
    let odd = odd_power_sum(s, 1e-12);
    let wells = |eta: f64| -> f64 {
        match ((p + 1) % 2, eta < 0.0) {
            (1, _) => 1.0,
            (0, true) => 2.0,
            _ => 0.0,
        }
    };
    let asym = |eta: f64| wells(eta) * ((pf + 1.0) * eta.abs().powf(pf / (pf + 1.0))).powf(-s) * odd;
    let refine = 1.5 * (1e-3 / tol.max(1e-6)).sqrt().max(1.0);
    let failure = RefCell::new(None);
    let integrand = |eta: f64| match level_power_sum(&chain_potential(p, eta), s, refine) {
        Ok(l) => l.value + l.tail,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let r = adaptive(integrand, -ETA_RANGE, ETA_RANGE, Tolerance::new(0.0, tol / 8.0));
    let edges = [integrand(-ETA_RANGE), integrand(ETA_RANGE)];
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (mut tails, mut tail_err) = (0.0, 0.0);
    for (edge, eta) in edges.into_iter().zip([-ETA_RANGE, ETA_RANGE]) {
        if wells(eta) > 0.0 {
            let t = wells(eta) * (pf + 1.0).powf(-s) * odd * ETA_RANGE.powf(1.0 - decay) / (decay - 1.0);
            let ratio = edge / asym(eta);
            tails += ratio * t;
            tail_err += (ratio - 1.0).abs() * t;
        } else {
            let t = edge * ETA_RANGE / (2.0 * s - 1.0);
            tails += t;
            tail_err += t;
        }
    }
    let scale = (pf + 1.0).powf(1.0 / qf) * (pf + 2.0) / (2.0 * PI * qf * s);
    Ok(StrongConstant {
        value: scale * (r.value + tails),
        error: scale * (r.error + tail_err),
        exponent: (pf + qf + 2.0) / (2.0 * qf),
        eta_range: ETA_RANGE,
        evals: r.evals,
    })
}

/// (πα)⁻¹·B(1/(2α), 3/2) through log-Gamma.
pub fn kappa1_alpha(alpha: f64) -> f64 {
    let a = 1.0 / (2.0 * alpha);
    (ln_gamma(a) + ln_gamma(1.5) - ln_gamma(a + 1.5)).exp() / (PI * alpha)
}

fn check_3d(k: u32, l: u32, p: u32) -> Result<f64, AsymError> {
    if !(1 <= p && p < k && k <= l) {
        return Err(AsymError::InvalidInput(format!("need 1 ≤ p < k ≤ l, got (k, l, p) = ({k}, {l}, {p})")));
    }
    Ok(p as f64 / (k + l + 1) as f64)
}

/// κ₁ for the potential y₃^{2p}x₁^{2k}x₂^{2l}.
pub fn kappa1_3d(k: u32, l: u32, p: u32) -> Result<f64, AsymError> {
    Ok(kappa1_alpha(check_3d(k, l, p)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kappa3d {
    pub kappa1: f64,
    pub alpha: f64,
    /// Extracted levels of −Δ + x₁^{2k}x₂^{2l}.
    pub levels: Vec<f64>,
    pub partial: f64,
    pub tail: f64,
    /// tail / (partial + tail).
    pub relative_tail: f64,
    pub value: f64,
    /// Asymptotic law λⱼ ≈ C·j^σ/(log j)^τ used for the tail.
    pub law: (f64, f64, f64),
    pub counts: usize,
    pub flags: Vec<DirectFlag>,
}

/// Relative width to which each level is bisected.
const LEVEL_DIGITS: f64 = 5e-4;

/// κ(V) = κ₁·Σⱼ λⱼ^{−1/(2α)} with the first `levels` eigenvalues bisected out of direct counts
/// on `grid` and the remainder bounded through the two-dimensional counting law.
pub fn kappa_3d(k: u32, l: u32, p: u32, levels: usize, grid: &GridND) -> Result<Kappa3d, AsymError> {
    let alpha = check_3d(k, l, p)?;
    if levels < 4 {
        return Err(AsymError::InvalidInput("need at least 4 levels for the tail law".into()));
    }
    let e = 1.0 / (2.0 * alpha);
    let (sigma, tau) = if k == l {
        (2.0 * l as f64 / (2 * l + 1) as f64, 1.0)
    } else {
        (2.0 * l as f64 / (l + k + 1) as f64, 0.0)
    };
    if sigma * e <= 1.0 {
        return Err(AsymError::TailBoundFailure { exponent: -sigma * e });
    }
    let v = MultiPoly::from_terms(2, [(vec![2 * k, 2 * l], q(1))]);
    let spec = SchrodingerSpec::electric(v);
    let mut samples: Vec<(f64, u64)> = Vec::new();
    let mut hi = 1.0;
    let top = loop {
        let c = count_nd_direct(&spec, hi, grid)?;
        samples.push((hi, c.count));
        if c.count as usize >= levels {
            break c;
        }
        hi *= 1.5;
    };
    let mut counts = samples.len();
    let count = |lam: f64| crate::spectra::count_unchecked(&spec, lam, grid);
    let mut found = Vec::with_capacity(levels);
    for j in 1..=levels as u64 {
        loop {
            let lo = samples.iter().filter(|s| s.1 < j).map(|s| s.0).fold(0.0, f64::max);
            let up = samples.iter().filter(|s| s.1 >= j).map(|s| s.0).fold(f64::INFINITY, f64::min);
            if up - lo <= LEVEL_DIGITS * up {
                found.push(0.5 * (lo + up));
                break;
            }
            let mid = 0.5 * (lo + up);
            samples.push((mid, count(mid)?));
            counts += 1;
        }
    }
    let partial: f64 = found.iter().rev().map(|x| x.powf(-e)).sum();
    // C from the upper half of the extracted levels
    let mut cs: Vec<f64> = found
        .iter()
        .enumerate()
        .skip(levels / 2)
        .map(|(i, lam)| {
            let j = (i + 1) as f64;
            lam * j.ln().powf(tau) / j.powf(sigma)
        })
        .collect();
    cs.sort_by(f64::total_cmp);
    let c = cs[cs.len() / 2];
    let start = levels as f64 + 0.5;
    let term = |t: f64| (c * t.powf(sigma) / t.ln().powf(tau)).powf(-e);
    let tail = adaptive_half_line(term, start, Tolerance::new(0.0, 1e-8)).value;
    let total = partial + tail;
    Ok(Kappa3d {
        kappa1: kappa1_alpha(alpha),
        alpha,
        levels: found,
        partial,
        tail,
        relative_tail: tail / total,
        value: kappa1_alpha(alpha) * total,
        law: (c, sigma, tau),
        counts,
        flags: top.flags,
    })
}
