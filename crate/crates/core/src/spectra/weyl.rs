//! The phase-space functional ∫ v_{B(x)}(λ − V(x)) dx.

use super::landau::{density, frequencies};
use super::quad::{nested, Tolerance};
use super::SpectraError;
use crate::liealg::SchrodingerSpec;
use crate::poly::{F64Poly, MultiPoly};
use crate::scaling::{bounding_radii, psi_star, StarFunction};
use num_traits::Signed;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Region {
    AllSpace,
    /// [−Lⱼ, Lⱼ] per axis.
    Box(Vec<f64>),
    /// {Ψ* − Ψ₀ ≤ Ψ*/d} with Ψ₀ = V^{1/2} + Σ|b_jk|^{1/2}.
    WeaklyDegenerate(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylIntegral {
    pub value: f64,
    pub error: f64,
    /// Half-widths of the box actually integrated.
    pub radii: Vec<f64>,
    pub evals: usize,
}

/// Doublings of the box before divergence is declared.
const MAX_DOUBLINGS: usize = 10;

struct Integrand {
    n: usize,
    v: F64Poly,
    b: Vec<Vec<F64Poly>>,
    weak: Option<(StarFunction, F64Poly, Vec<F64Poly>, f64)>,
}

impl Integrand {
    fn new(spec: &SchrodingerSpec, region: &Region) -> Self {
        let n = spec.n();
        let t = spec.tensor();
        let b = (0..n).map(|j| (0..n).map(|k| t.get(j, k).compile()).collect()).collect();
        let weak = match region {
            Region::WeaklyDegenerate(d) => {
                let upper = t.upper().into_iter().map(MultiPoly::compile).collect();
                Some((psi_star(spec), spec.v().compile(), upper, *d))
            }
            _ => None,
        };
        Integrand { n, v: spec.v().compile(), b, weak }
    }

    fn eval(&self, x: &[f64], lambda: f64) -> f64 {
        if let Some((psi, v, upper, d)) = &self.weak {
            let full = psi.eval(x);
            let psi0 = v.eval(x).max(0.0).sqrt() + upper.iter().map(|p| p.eval(x).abs().sqrt()).sum::<f64>();
            if full - psi0 > full / d {
                return 0.0;
            }
        }
        let mu = lambda - self.v.eval(x);
        if mu <= 0.0 {
            return 0.0;
        }
        let b = &self.b;
        let f = match self.n {
            2 => b[0][1].eval(x).abs(),
            3 => (b[0][1].eval(x).powi(2) + b[0][2].eval(x).powi(2) + b[1][2].eval(x).powi(2)).sqrt(),
            _ => {
                let bx: Vec<Vec<f64>> = b.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect();
                let (freqs, _) = frequencies(&bx);
                return density(self.n, &freqs, mu);
            }
        };
        if f > 0.0 {
            density(self.n, &[f], mu)
        } else {
            density(self.n, &[], mu)
        }
    }
}

/// Box containing the support {V + Σbⱼ < λ} when V is visibly nonnegative.
fn support_box(spec: &SchrodingerSpec, lambda: f64) -> Option<Vec<f64>> {
    let n = spec.n();
    let v = spec.v();
    let v_nonneg = v.terms().all(|(m, c)| c.is_positive() && m.0.iter().all(|e| e % 2 == 0));
    if !v.is_zero() && !v_nonneg {
        return None;
    }
    let mut cons: Vec<(MultiPoly, f64)> = spec.tensor().upper().into_iter().map(|p| (p.clone(), lambda)).collect();
    if !v.is_zero() {
        cons.push((v.clone(), lambda));
    }
    bounding_radii(&cons, n)
}

/// ∫_region v_{B(x)}(λ − V(x)) dx by nested adaptive quadrature; unbounded supports are
/// integrated over doubling boxes until the geometric tail estimate drops below tolerance.
pub fn weyl_cdv_integral(spec: &SchrodingerSpec, lambda: f64, region: &Region, rel_tol: f64) -> Result<WeylIntegral, SpectraError> {
    let n = spec.n();
    let f = Integrand::new(spec, region);
    let eval = |x: &[f64]| f.eval(x, lambda);
    let on_box = |r: &[f64], tol: Tolerance| {
        let lo: Vec<f64> = r.iter().map(|v| -v).collect();
        nested(&eval, &lo, r, tol)
    };
    let fixed = match region {
        Region::Box(r) => Some(r.clone()),
        _ => support_box(spec, lambda),
    };
    if let Some(r) = fixed {
        let q = on_box(&r, Tolerance::new(0.0, rel_tol));
        return Ok(WeylIntegral { value: q.value, error: q.error, radii: r, evals: q.evals });
    }
    // bounded effort per box: divergence shows in the increments long before full accuracy
    let sweep = Tolerance { abs: 0.0, rel: rel_tol.max(1e-3), max_intervals: 120 };
    let mut radius = 1.0;
    let mut prev = on_box(&vec![radius; n], sweep);
    let mut evals = prev.evals;
    let mut increments: Vec<f64> = Vec::new();
    for _ in 0..MAX_DOUBLINGS {
        radius *= 2.0;
        let cur = on_box(&vec![radius; n], sweep);
        evals += cur.evals;
        let inc = (cur.value - prev.value).max(0.0);
        increments.push(inc);
        prev = cur;
        let k = increments.len();
        if k >= 3 {
            let (a, b) = (increments[k - 2], increments[k - 1]);
            let ratio = if a > 0.0 { b / a } else { 0.0 };
            let tail = if ratio < 1.0 { b * ratio / (1.0 - ratio) } else { f64::INFINITY };
            if tail <= rel_tol * prev.value.abs() && b <= rel_tol * prev.value.abs() {
                return Ok(WeylIntegral { value: prev.value + tail, error: prev.error + tail, radii: vec![radius; n], evals });
            }
            // increments that stop shrinking signal a divergent integral
            if k >= 6 && increments[k - 3..].iter().all(|&d| d > 0.0) && ratio > 0.9 && increments[k - 3] <= 1.1 * increments[k - 2] {
                return Err(SpectraError::NonConvergent { partial: prev.value, tail });
            }
        }
    }
    let k = increments.len();
    let tail = increments[k - 1] * 2.0;
    Err(SpectraError::NonConvergent { partial: prev.value, tail })
}
