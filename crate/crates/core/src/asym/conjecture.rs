//! κ·(log λ)^β·∫_Q N(λ, H_Θ) dν(Θ) over the quotient family of the scaling limit.

use super::constants::{kappa_inhomog, strong_constant};
use super::AsymError;
use crate::curve::CountingCurve;
use crate::exact::q_to_f64;
use crate::liealg::SchrodingerSpec;
use crate::orbit::{landau_frequencies, FamilyParams, QuotientFamily};
use crate::poly::MultiPoly;
use crate::scaling::{bounding_radii, unit_ball_volume, Degeneration, DegenerationReport, LimitMeasure};
use crate::spectra::quad::{kronrod15, nested, Tolerance};
use crate::spectra::{harmonic_count, landau_sum};
use num_traits::Signed;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub operation: String,
    pub tolerance: f64,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureInfo {
    pub method: String,
    pub evals: usize,
    /// Truncation radii of the parameter region, per axis.
    pub radii: Vec<f64>,
    /// Largest relative error estimate over the λ grid.
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureResult {
    /// κ·(log λ)^β·∫_Q N dν.
    pub rhs_curve: CountingCurve,
    /// ∫_Q N dν alone.
    pub integral_curve: CountingCurve,
    pub kappa_used: f64,
    pub kappa_provenance: Provenance,
    pub beta: u32,
    /// K and a when the integral is exactly K·λᵃ.
    pub power_law: Option<(f64, f64)>,
    pub quadrature: QuadratureInfo,
}

impl ConjectureResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Options for the family integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjectureOptions {
    pub rel_tol: f64,
    /// Tolerance for the κ(H) and strong-chain constants (at least 1e-3).
    pub constant_tol: f64,
    /// Panels resolved exactly before the tail of a harmonic parameter integral.
    pub harmonic_panels: usize,
}

impl Default for ConjectureOptions {
    fn default() -> Self {
        ConjectureOptions { rel_tol: 1e-4, constant_tol: 1e-2, harmonic_panels: 4000 }
    }
}

struct Integral {
    value: f64,
    error: f64,
    evals: usize,
    radii: Vec<f64>,
}

pub fn conjecture_rhs(
    spec: &SchrodingerSpec,
    family: &QuotientFamily,
    limit: &LimitMeasure,
    report: &DegenerationReport,
    lambdas: &[f64],
) -> Result<ConjectureResult, AsymError> {
    conjecture_rhs_with(spec, family, limit, report, lambdas, ConjectureOptions::default())
}

pub fn conjecture_rhs_with(
    spec: &SchrodingerSpec,
    family: &QuotientFamily,
    limit: &LimitMeasure,
    report: &DegenerationReport,
    lambdas: &[f64],
    opts: ConjectureOptions,
) -> Result<ConjectureResult, AsymError> {
    let (kappa, kprov) = match report.classification {
        Degeneration::Strong => (1.0, "strong degeneration: exactly 1".to_string()),
        Degeneration::WeakIntermediate => (
            report.kappa.value,
            format!("classifier limit of G2/G1, 95% interval [{:.4}, {:.4}]", report.kappa.lo, report.kappa.hi),
        ),
    };
    let beta = limit.beta;
    let power = |c: f64, err: f64, a: f64, evals: usize| -> Vec<Integral> {
        lambdas
            .iter()
            .map(|l| Integral { value: c * l.powf(a), error: err * l.powf(a), evals, radii: vec![] })
            .collect()
    };
    let (method, power_law, points): (String, Option<(f64, f64)>, Vec<Integral>) = match &family.params {
        FamilyParams::Abelian { spec: s } => (
            "x-quadrature of the ξ-ball volume".into(),
            None,
            lambdas.iter().map(|&l| abelian(s, family, l, opts.rel_tol)).collect::<Result<_, _>>()?,
        ),
        FamilyParams::HeisenbergCdV { spec: s, rank } => (
            "x-quadrature of Landau-level counts".into(),
            None,
            lambdas.iter().map(|&l| cdv(s, *rank, family, l, opts.rel_tol)).collect::<Result<_, _>>()?,
        ),
        FamilyParams::MonomialBalanced { k } => (
            "exact panels between harmonic jumps plus continuum tail".into(),
            None,
            lambdas.iter().map(|&l| balanced(*k, family, l, opts.harmonic_panels)).collect(),
        ),
        FamilyParams::MonomialStrong { p, q } => {
            let c = strong_constant(*p, *q, opts.constant_tol)?;
            (
                format!("level sums over the scaled chain, eta in [-{0}, {0}]", c.eta_range),
                Some((c.value, c.exponent)),
                power(c.value, c.error, c.exponent, c.evals),
            )
        }
        FamilyParams::Triangular { factor } => {
            let k = kappa_inhomog(opts.constant_tol)?;
            // ν = factor·|A|/(2π) and κ(H) carries |A|/π
            let half = 0.5 * q_to_f64(factor);
            (
                format!("level sums over the double well, b in [{}, {}]", k.b_range.0, k.b_range.1),
                Some((half * k.value, 3.5)),
                power(half * k.value, half * k.error, 3.5, k.evals),
            )
        }
    };
    let label = format!("{:?}", family.kind);
    let source = format!("a = {:?}, V = {}", spec.a().iter().map(|p| p.to_string()).collect::<Vec<_>>(), spec.v());
    let mut integral_curve = CountingCurve::new().with_meta("family", &label).with_meta("spec", &source);
    let mut rhs_curve = CountingCurve::new()
        .with_meta("family", &label)
        .with_meta("spec", &source)
        .with_meta("kappa", kappa)
        .with_meta("beta", beta);
    let mut rel: f64 = 0.0;
    let mut evals = 0;
    let mut radii = Vec::new();
    for (&lam, pt) in lambdas.iter().zip(&points) {
        let factor = kappa * lam.ln().powi(beta as i32);
        integral_curve.push(lam, pt.value, pt.error, "orbit-integral");
        rhs_curve.push(lam, factor * pt.value, factor * pt.error, "conjecture");
        if pt.value > 0.0 {
            rel = rel.max(pt.error / pt.value);
        }
        evals += pt.evals;
        if pt.radii.len() > radii.len() || pt.radii.iter().zip(&radii).any(|(a, b)| a > b) {
            radii.clone_from(&pt.radii);
        }
    }
    Ok(ConjectureResult {
        rhs_curve,
        integral_curve,
        kappa_used: kappa,
        kappa_provenance: Provenance { operation: kprov, tolerance: report.kappa.hi - report.kappa.lo, seed: None },
        beta,
        power_law,
        quadrature: QuadratureInfo { method, evals, radii, relative_error: rel },
    })
}

/// Box holding {V < λ} or, with a field, {V + max|b_jk| < λ}; needs V visibly nonnegative.
fn support(spec: &SchrodingerSpec, lambda: f64) -> Result<Vec<f64>, AsymError> {
    let v = spec.v();
    let v_nonneg = v.terms().all(|(m, c)| c.is_positive() && m.0.iter().all(|e| e % 2 == 0));
    if !v.is_zero() && !v_nonneg {
        return Err(AsymError::UnsupportedStructure(format!("no support box for V = {v}")));
    }
    let mut cons: Vec<(MultiPoly, f64)> = spec
        .tensor()
        .upper()
        .into_iter()
        .map(|p| if p.terms().all(|(_, c)| c.is_negative()) { (p.neg(), lambda) } else { (p.clone(), lambda) })
        .collect();
    if !v.is_zero() {
        cons.push((v.clone(), lambda));
    }
    bounding_radii(&cons, spec.n())
        .ok_or_else(|| AsymError::UnsupportedStructure("parameter region is unbounded at this λ".into()))
}

fn on_box(f: &(impl Fn(&[f64]) -> f64 + Sync), radii: Vec<f64>, rel_tol: f64) -> Integral {
    let lo: Vec<f64> = radii.iter().map(|r| -r).collect();
    let r = nested(f, &lo, &radii, Tolerance::new(0.0, rel_tol));
    Integral { value: r.value, error: r.error, evals: r.evals, radii }
}

/// Scalar realizations: ∫dξ [|ξ|² + V(x) < λ] = |v_n|(λ − V)^{n/2}.
fn abelian(spec: &SchrodingerSpec, family: &QuotientFamily, lambda: f64, rel_tol: f64) -> Result<Integral, AsymError> {
    let n = spec.n();
    let nu = family.nu_density(&vec![0.0; 2 * n]);
    let ball = unit_ball_volume(n);
    let v = spec.v().compile();
    let f = |x: &[f64]| {
        let mu = lambda - v.eval(x);
        if mu > 0.0 {
            nu * ball * mu.powf(n as f64 / 2.0)
        } else {
            0.0
        }
    };
    Ok(on_box(&f, support(spec, lambda)?, rel_tol))
}

/// Harmonic realizations Σ(−∂²+bⱼ²yⱼ²) + |ξ''|² + V(x): the ξ'' integral is a Landau sum.
fn cdv(spec: &SchrodingerSpec, rank: usize, family: &QuotientFamily, lambda: f64, rel_tol: f64) -> Result<Integral, AsymError> {
    let n = spec.n();
    let free = n - rank;
    let t = spec.tensor();
    let v = spec.v().compile();
    let entries: Vec<Vec<_>> = (0..n).map(|j| (0..n).map(|k| t.get(j, k).compile()).collect()).collect();
    let f = |x: &[f64]| {
        let mu = lambda - v.eval(x);
        if mu <= 0.0 {
            return 0.0;
        }
        let mut q = vec![0.0; free];
        q.extend_from_slice(x);
        let nu = family.nu_density(&q);
        if nu == 0.0 {
            return 0.0;
        }
        let bx: Vec<Vec<f64>> = entries.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect();
        let (b, _) = landau_frequencies(&bx);
        let b = &b[..rank / 2];
        if free == 0 {
            nu * harmonic_count(b, 0.0, mu) as f64
        } else {
            nu * landau_sum(b, free, mu)
        }
    };
    Ok(on_box(&f, support(spec, lambda)?, rel_tol))
}

/// −d²/dx² + y²x² has levels (2m+1)|y|, so the count is constant between λ/(2m+3) and λ/(2m+1).
fn balanced(k: u32, family: &QuotientFamily, lambda: f64, panels: usize) -> Integral {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evals = 0;
    let nu = |y: f64| family.nu_density(&[y]);
    for m in 0..panels {
        let (a, b) = (lambda / (2 * m + 3) as f64, lambda / (2 * m + 1) as f64);
        let count = harmonic_count(&[0.5 * (a + b)], 0.0, lambda) as f64;
        let (v, e) = kronrod15(&nu, a, b);
        value += count * v;
        error += count * e;
        evals += 17;
    }
    // below y_M the count is λ/(2y) + O(1): integrate the continuum part, keep O(1) as error
    let ym = lambda / (2 * panels + 1) as f64;
    let kf = k as f64;
    let scale = 1.0 / (std::f64::consts::PI * kf * kf);
    let cont = scale * 0.5 * lambda * kf * ym.powf(1.0 / kf);
    let bound = scale * ym.powf(1.0 + 1.0 / kf) / (1.0 + 1.0 / kf);
    // both signs of y
    Integral { value: 2.0 * (value + cont), error: 2.0 * (error + bound), evals, radii: vec![lambda] }
}
