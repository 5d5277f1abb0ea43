//! Sturm-sequence counts for the Dirichlet tridiagonal discretization of −d²/dy² + W(y).

use super::SpectraError;
use crate::exact::q_to_f64;
use crate::poly::{F64Poly, MultiPoly};
use serde::Serialize;

/// Interior nodes −L + (i+1)h, i < m, with h = 2L/(m+1) and Dirichlet ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid1D {
    pub half_width: f64,
    pub points: usize,
}

/// Spacing bound h√λ ≤ RESOLUTION.
pub const RESOLUTION: f64 = 0.25;

/// Potential threshold factor at the boundary: W ≥ 4λ.
pub const BOUNDARY_FACTOR: f64 = 4.0;

impl Grid1D {
    pub fn new(half_width: f64, points: usize) -> Result<Self, SpectraError> {
        if !(half_width > 0.0 && half_width.is_finite()) || points == 0 {
            return Err(SpectraError::InvalidGrid(format!("half width {half_width}, {points} points")));
        }
        Ok(Grid1D { half_width, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.spacing()
    }

    /// Smallest domain with W ≥ 4λ outside it, meshed at `refine` times the resolution rule.
    pub fn auto(w: &MultiPoly, lambda: f64, refine: f64) -> Result<Self, SpectraError> {
        let coeffs = univariate(w)?;
        let threshold = BOUNDARY_FACTOR * lambda.max(1.0);
        let deg = coeffs.len() - 1;
        let lead = coeffs[deg];
        if deg == 0 || deg % 2 == 1 || lead <= 0.0 {
            return Err(SpectraError::NotConfining(format!("{w} does not tend to +inf")));
        }
        // no root of W − threshold lies beyond the Cauchy bound
        let mut shifted = coeffs.clone();
        shifted[0] -= threshold;
        let cauchy = 1.0 + shifted[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
        let f = w.compile();
        let steps = 4096;
        let dy = cauchy / steps as f64;
        let mut outer = 0.0f64;
        for i in 0..=steps {
            let y = i as f64 * dy;
            if f.eval(&[y]) < threshold || f.eval(&[-y]) < threshold {
                outer = y;
            }
        }
        let half_width = (outer + 2.0 * dy).max(dy);
        let limit = spacing_limit(&f, half_width, lambda) / refine.max(1.0);
        let points = ((2.0 * half_width / limit).ceil() as usize).max(2) - 1;
        Grid1D::new(half_width, points)
    }

    /// Resolution rules: h√λ ≤ 1/4 and h·max|W'| ≤ max|W| on the nodes.
    pub fn check(&self, w: &MultiPoly, lambda: f64) -> Result<(), SpectraError> {
        let f = w.compile();
        let limit = spacing_limit(&f, self.half_width, lambda);
        let h = self.spacing();
        if h > limit * (1.0 + 1e-12) {
            return Err(SpectraError::GridTooCoarse { axis: 0, h, limit });
        }
        Ok(())
    }
}

fn spacing_limit(f: &F64Poly, half_width: f64, lambda: f64) -> f64 {
    let mut limit = if lambda > 0.0 { RESOLUTION / lambda.sqrt() } else { f64::INFINITY };
    let samples = 2048;
    let (mut wmax, mut dmax) = (0.0f64, 0.0f64);
    let dy = 2.0 * half_width / samples as f64;
    let mut prev = f.eval(&[-half_width]);
    wmax = wmax.max(prev.abs());
    for i in 1..=samples {
        let cur = f.eval(&[-half_width + i as f64 * dy]);
        wmax = wmax.max(cur.abs());
        dmax = dmax.max((cur - prev).abs() / dy);
        prev = cur;
    }
    if dmax > 0.0 {
        limit = limit.min(wmax / dmax);
    }
    limit.min(half_width)
}

/// Coefficients c₀,…,c_d of a polynomial in its first variable.
fn univariate(w: &MultiPoly) -> Result<Vec<f64>, SpectraError> {
    let mut c = vec![0.0; 1];
    for (m, v) in w.terms() {
        if m.0.iter().skip(1).any(|&e| e > 0) {
            return Err(SpectraError::NotOneDimensional);
        }
        let d = m.0.first().copied().unwrap_or(0) as usize;
        if c.len() <= d {
            c.resize(d + 1, 0.0);
        }
        c[d] += q_to_f64(v);
    }
    Ok(c)
}

/// Negative count of the LDLᵀ pivots of T − λI for T = tridiag(off, diag, off).
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let scale = diag.iter().chain(off).fold(lambda.abs(), |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let pivmin = f64::EPSILON * f64::EPSILON * scale;
    let mut count = 0;
    let mut q = 1.0;
    for (i, d) in diag.iter().enumerate() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = d - lambda - e2 / q;
        if q.abs() < pivmin {
            q = pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues below `bound`, in increasing order, each bisected to full precision.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64], bound: f64) -> Vec<f64> {
    let k = sturm_count(diag, off, bound);
    if k == 0 {
        return Vec::new();
    }
    let radius = |i: usize| -> f64 {
        let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let r = if i < off.len() { off[i].abs() } else { 0.0 };
        l + r
    };
    let lo0 = (0..diag.len()).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    (0..k)
        .map(|j| {
            let (mut lo, mut hi) = (lo0 - 1.0, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(diag, off, mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Eigenvalues below λ of the Dirichlet discretization of −d²/dy² + W(y).
pub fn count_1d(w: &MultiPoly, lambda: f64, grid: &Grid1D) -> Result<usize, SpectraError> {
    if univariate(w).is_err() {
        return Err(SpectraError::NotOneDimensional);
    }
    let f = w.compile();
    let required = BOUNDARY_FACTOR * lambda;
    let boundary = f.eval(&[-grid.half_width]).min(f.eval(&[grid.half_width]));
    if lambda > 0.0 && boundary < required {
        return Err(SpectraError::DomainTooSmall { boundary, required });
    }
    grid.check(w, lambda)?;
    let (diag, off) = tridiagonal(&f, grid);
    Ok(sturm_count(&diag, &off, lambda))
}

/// Eigenvalues below `bound` of the same discretization, ascending.
pub fn eigenvalues_1d(w: &MultiPoly, bound: f64, grid: &Grid1D) -> Result<Vec<f64>, SpectraError> {
    if univariate(w).is_err() {
        return Err(SpectraError::NotOneDimensional);
    }
    let f = w.compile();
    let required = BOUNDARY_FACTOR * bound;
    let boundary = f.eval(&[-grid.half_width]).min(f.eval(&[grid.half_width]));
    if bound > 0.0 && boundary < required {
        return Err(SpectraError::DomainTooSmall { boundary, required });
    }
    grid.check(w, bound)?;
    let (diag, off) = tridiagonal(&f, grid);
    Ok(tridiagonal_eigenvalues(&diag, &off, bound))
}

pub(crate) fn tridiagonal(f: &F64Poly, grid: &Grid1D) -> (Vec<f64>, Vec<f64>) {
    let h = grid.spacing();
    let k = 1.0 / (h * h);
    let diag = (0..grid.points).map(|i| 2.0 * k + f.eval(&[grid.node(i)])).collect();
    (diag, vec![-k; grid.points.saturating_sub(1)])
}
