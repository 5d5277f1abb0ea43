//! Dilated measures, Nilsson exponents, limit measures and the degeneration classifier.

mod mc;
mod subst;

pub use mc::{bounding_radii, integrate_box, mc_growth, unit_ball_volume, StarFunction};
pub use subst::{triangular_substitution, TriangularSubst};

use crate::asym::fit::{fit, line_fit, FitError, PowerLogFit};
use crate::curve::{log_space, CountingCurve};
use crate::exact::{q, q_to_f64, Q};
use crate::liealg::SchrodingerSpec;
use crate::orbit::OrbitChart;
use crate::liealg::{LieAlgebra, LieError};
use crate::poly::{all_derivatives, quasi_weights, Mono, MultiPoly, WeightVector};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("sublevel set has infinite measure")]
    UnboundedSublevelSet,
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("validation failed: exact (alpha, beta) = ({alpha}, {beta}), sampled fit ({a:.3}, {b})")]
    ValidationFailure { alpha: f64, beta: u32, a: f64, b: u8 },
    #[error("inconclusive classification: log-ratio slope {slope:.3} ± {halfwidth:.3}")]
    InconclusiveClassification { slope: f64, halfwidth: f64, report: Box<DegenerationReport> },
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LimitKind {
    /// ξ ↦ λξ, x ↦ δ_λ x.
    QuasiDilation { gamma: Vec<Q> },
    /// Polynomial substitution to linear survivors with the given |Jacobian|.
    Triangular { jacobian: Q },
    /// b = x₁ᵏx₂ˡ.
    Monomial { k: u32, l: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LimitDensity {
    /// Constant multiple of Lebesgue measure in the limit variables.
    Constant(Q),
    /// factor·|v|^exponent in limit variable `var`.
    Power { var: usize, factor: Q, exponent: Q },
}

impl LimitDensity {
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            LimitDensity::Constant(c) => q_to_f64(c),
            LimitDensity::Power { var, factor, exponent } => q_to_f64(factor) * v[*var].abs().powf(q_to_f64(exponent)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Validation {
    pub curve: CountingCurve,
    pub fit: PowerLogFit,
}

/// μ₀ = (2π)^{−n'}·ψ_*(density·Lebesgue) with G(λ) growing like λ^α(log λ)^β.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitMeasure {
    pub alpha: Q,
    pub beta: u32,
    pub kind: LimitKind,
    pub limit_vars: Vec<String>,
    /// Limiting expression of every 𝔤*-coordinate; `None` where it vanishes.
    pub survivors: Vec<Option<MultiPoly>>,
    pub density: LimitDensity,
    /// Basis vectors spanning the ideal 𝔞.
    pub annihilated: Vec<Vec<Q>>,
    pub n_prime: usize,
    pub labels: Vec<String>,
    #[serde(skip)]
    pub source: Option<SchrodingerSpec>,
    pub validation: Option<Validation>,
}

impl LimitMeasure {
    pub fn alpha_f64(&self) -> f64 {
        q_to_f64(&self.alpha)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Sampling plan for cross-checking exact exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationPlan {
    pub lambdas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub alpha_tol: f64,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        ValidationPlan { lambdas: log_space(1e3, 1e6, 7), samples: 1_000_000, seed: 0x5eed, alpha_tol: 0.1 }
    }
}

/// Exact limit, cross-validated against sampled growth.
pub fn exact_limit(chart: &OrbitChart, weights: &WeightVector) -> Result<LimitMeasure, ScalingError> {
    exact_limit_with(chart, weights, &ValidationPlan::default())
}

pub fn exact_limit_with(chart: &OrbitChart, weights: &WeightVector, plan: &ValidationPlan) -> Result<LimitMeasure, ScalingError> {
    let mut mu = exact_limit_unchecked(chart, weights)?;
    let curve = mc_growth(&chart.coords, &plan.lambdas, plan.samples, plan.seed)?;
    let f = fit(&curve, None)?;
    if (f.a - mu.alpha_f64()).abs() > plan.alpha_tol || f.b as u32 != mu.beta {
        return Err(ScalingError::ValidationFailure { alpha: mu.alpha_f64(), beta: mu.beta, a: f.a, b: f.b });
    }
    mu.validation = Some(Validation { curve, fit: f });
    Ok(mu)
}

/// Dispatch over monomial, quasi-dilation and triangular families.
pub fn exact_limit_unchecked(chart: &OrbitChart, weights: &WeightVector) -> Result<LimitMeasure, ScalingError> {
    let mut reasons = Vec::new();
    match monomial_limit(chart) {
        Ok(m) => return Ok(m),
        Err(r) => reasons.push(format!("monomial: {r}")),
    }
    match quasi_limit(chart, &weights.gamma, LimitKind::QuasiDilation { gamma: weights.gamma.clone() }, true) {
        Ok(m) => return Ok(m),
        Err(r) => reasons.push(format!("quasi-dilation: {r}")),
    }
    match triangular_limit(chart) {
        Ok(m) => return Ok(m),
        Err(r) => reasons.push(format!("triangular: {r}")),
    }
    Err(ScalingError::UnsupportedFamily(reasons.join("; ")))
}

/// Weights of the nonconstant generators, or of their top-degree parts when those alone are quasi-homogeneous.
pub fn spec_weights(spec: &SchrodingerSpec) -> Result<WeightVector, ScalingError> {
    let gens: Vec<MultiPoly> = spec.generators().into_iter().filter(|p| !p.is_constant()).collect();
    quasi_weights(&gens)
        .or_else(|_| {
            let tops: Vec<MultiPoly> = gens
                .iter()
                .map(|p| p.homogeneous_part(p.total_degree().unwrap_or(0)))
                .collect();
            quasi_weights(&tops)
        })
        .map_err(|e| ScalingError::UnsupportedFamily(format!("no dilation weights: {e}")))
}

/// The quotient 𝔤/𝔞 carrying the limit measure.
pub fn reduced_algebra(g: &LieAlgebra, mu0: &LimitMeasure) -> Result<LieAlgebra, LieError> {
    if mu0.annihilated.is_empty() {
        return Ok(g.clone());
    }
    g.quotient(&mu0.annihilated)
}

/// Chart coordinates split into ξ-slots (coordinate ↦ ξ index) and x-only coordinates.
struct Split {
    xi_of: Vec<Option<usize>>,
}

fn split_chart(chart: &OrbitChart) -> Result<Split, String> {
    let np = chart.n_prime;
    let mut xi_of = Vec::with_capacity(chart.coords.len());
    for p in &chart.coords {
        let xi_vars: Vec<usize> = (0..np).filter(|&j| p.degree_in(j + 1) > 0).collect();
        match xi_vars.as_slice() {
            [] => xi_of.push(None),
            [j] if *p == MultiPoly::var(p.nvars(), j + 1) => xi_of.push(Some(*j)),
            _ => return Err("coordinate mixes fiber and base directions".into()),
        }
    }
    if (0..np).any(|j| !xi_of.contains(&Some(j))) {
        return Err("fiber direction without a coordinate".into());
    }
    Ok(Split { xi_of })
}

fn chart_vars(np: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=np).map(|j| format!("xi{j}")).collect();
    v.extend((1..=np).map(|j| format!("x{j}")));
    v
}

fn basis_vector(d: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); d];
    v[i] = Q::one();
    v
}

fn annihilated_of(survivors: &[Option<MultiPoly>]) -> Vec<Vec<Q>> {
    let d = survivors.len();
    survivors
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(i, _)| basis_vector(d, i))
        .collect()
}

/// Limit under ξ ↦ λξ, x ↦ δ_λ x with weights γ on x.
fn quasi_limit(chart: &OrbitChart, gamma: &[Q], kind: LimitKind, check_finite: bool) -> Result<LimitMeasure, String> {
    let np = chart.n_prime;
    if gamma.len() != np {
        return Err(format!("{} weights for {} base directions", gamma.len(), np));
    }
    split_chart(chart)?;
    let mut full = vec![Q::one(); np];
    full.extend(gamma.iter().cloned());
    let one = Q::one();
    let mut survivors = Vec::new();
    for p in &chart.coords {
        match p.max_quasi_degree(&full) {
            None => survivors.push(None),
            Some(d) if d > one => return Err(format!("coordinate {p} has quasi-degree {d} > 1")),
            Some(d) if d == one => survivors.push(Some(p.quasi_part(&full, &one))),
            Some(_) => survivors.push(None),
        }
    }
    let base: Vec<MultiPoly> = survivors
        .iter()
        .flatten()
        .filter(|s| (0..np).all(|j| s.degree_in(j + 1) == 0))
        .cloned()
        .collect();
    if check_finite && !finite_sublevel(&base, np) {
        return Err("limit sublevel set is not certified finite".into());
    }
    let alpha = Q::from_integer(np.into()) + gamma.iter().fold(Q::zero(), |a, g| a + g);
    Ok(LimitMeasure {
        alpha,
        beta: 0,
        kind,
        limit_vars: chart_vars(np),
        annihilated: annihilated_of(&survivors),
        survivors,
        density: LimitDensity::Constant(Q::one()),
        n_prime: np,
        labels: chart.labels.clone(),
        source: chart.source.clone(),
        validation: None,
    })
}

/// Σ s(x)² > 0 on the boundary of the unit box in the base variables, certified on a grid.
fn finite_sublevel(survivors: &[MultiPoly], np: usize) -> bool {
    if survivors.is_empty() || np == 0 {
        return np == 0;
    }
    let nv = survivors[0].nvars();
    let sq = survivors.iter().fold(MultiPoly::zero(nv), |acc, s| acc.add(&s.mul(s)));
    let f = sq.compile();
    let ones = vec![1.0; nv];
    let lip = (np..2 * np)
        .map(|j| sq.partial(j + 1).compile().abs_bound(&ones).powi(2))
        .sum::<f64>()
        .sqrt();
    let free = np - 1;
    let m = if free == 0 { 1 } else { ((2e5f64).powf(1.0 / free as f64) as usize).clamp(2, 4001) };
    let h = if free == 0 { 0.0 } else { 2.0 / (m - 1) as f64 };
    let mut min = f64::INFINITY;
    let mut x = vec![0.0; nv];
    for face in 0..np {
        for sign in [-1.0, 1.0] {
            let total = m.pow(free as u32);
            for idx in 0..total {
                let mut r = idx;
                let mut k = 0;
                for j in 0..np {
                    x[np + j] = if j == face {
                        sign
                    } else {
                        let t = r % m;
                        r /= m;
                        k += 1;
                        -1.0 + h * t as f64
                    };
                }
                debug_assert!(k == free);
                min = min.min(f.eval(&x));
            }
        }
    }
    min > lip * h * (free as f64).sqrt() / 2.0
}

/// b = ±x₁ᵏx₂ˡ with no electric potential.
fn monomial_exponents(spec: &SchrodingerSpec) -> Option<(u32, u32)> {
    if spec.n() != 2 || !spec.v().is_zero() {
        return None;
    }
    let b = spec.field_2d()?;
    if b.num_terms() != 1 {
        return None;
    }
    let (m, c) = b.leading()?;
    (c.abs().is_one() && m.0[0] > 0 && m.0[1] > 0).then_some((m.0[0], m.0[1]))
}

fn monomial_limit(chart: &OrbitChart) -> Result<LimitMeasure, String> {
    let spec = chart.source.as_ref().ok_or("no source operator")?;
    let (k, l) = monomial_exponents(spec).ok_or("field is not a single unit monomial in two variables")?;
    if chart.n_prime != 2 {
        return Err("chart is not four-dimensional".into());
    }
    if k != l {
        // the variable carrying the smaller exponent is dilated
        let gamma = if k > l { vec![q(0), Q::new(1.into(), l.into())] } else { vec![Q::new(1.into(), k.into()), q(0)] };
        let mut m = quasi_limit(chart, &gamma, LimitKind::Monomial { k, l }, false)?;
        m.alpha = q(2) + Q::new(1.into(), k.min(l).into());
        return Ok(m);
    }
    split_chart(chart)?;
    let nv = 3;
    let top = Mono(vec![0, 0, k, k]);
    let survivors: Vec<Option<MultiPoly>> = chart
        .coords
        .iter()
        .map(|p| {
            if let Some(j) = (0..2).find(|&j| *p == MultiPoly::var(4, j + 1)) {
                Some(MultiPoly::var(nv, j + 1))
            } else if p.num_terms() == 1 && p.leading().is_some_and(|(m, c)| *m == top && c.is_one()) {
                Some(MultiPoly::var(nv, 3))
            } else {
                None
            }
        })
        .collect();
    if survivors.iter().flatten().count() != 3 {
        return Err("balanced chart lacks the top monomial coordinate".into());
    }
    let kq = Q::from_integer(k.into());
    Ok(LimitMeasure {
        alpha: q(2) + Q::one() / &kq,
        beta: 1,
        kind: LimitKind::Monomial { k, l },
        limit_vars: vec!["eta1".into(), "eta2".into(), "y".into()],
        annihilated: annihilated_of(&survivors),
        survivors,
        density: LimitDensity::Power { var: 2, factor: q(2) / (&kq * &kq), exponent: (Q::one() - &kq) / &kq },
        n_prime: 2,
        labels: chart.labels.clone(),
        source: chart.source.clone(),
        validation: None,
    })
}

fn triangular_limit(chart: &OrbitChart) -> Result<LimitMeasure, String> {
    let np = chart.n_prime;
    let split = split_chart(chart)?;
    let base_idx: Vec<usize> = (0..chart.coords.len()).filter(|&i| split.xi_of[i].is_none()).collect();
    let x_map: Vec<usize> = (np..2 * np).collect();
    let restricted: Vec<MultiPoly> = base_idx
        .iter()
        .map(|&i| {
            let p = &chart.coords[i];
            MultiPoly::from_terms(np, p.terms().map(|(m, c)| (m.0[np..].to_vec(), c.clone())))
        })
        .collect();
    let s = triangular_substitution(&restricted, np).ok_or("no triangular substitution")?;
    let nv = 2 * np;
    let mut survivors = vec![None; chart.coords.len()];
    for (i, j) in split.xi_of.iter().enumerate() {
        if let Some(j) = j {
            survivors[i] = Some(MultiPoly::var(nv, j + 1));
        }
    }
    for (&i, p) in base_idx.iter().zip(&restricted) {
        let y = s.apply(p);
        if y.is_constant() {
            continue;
        }
        if y.total_degree() != Some(1) || !y.constant_term().is_zero() {
            return Err(format!("coordinate {p} is not linear after substitution"));
        }
        survivors[i] = Some(y.embed(nv, &x_map));
    }
    let mut limit_vars: Vec<String> = (1..=np).map(|j| format!("eta{j}")).collect();
    limit_vars.extend((1..=np).map(|j| format!("y{j}")));
    Ok(LimitMeasure {
        alpha: Q::from_integer((2 * np).into()),
        beta: 0,
        kind: LimitKind::Triangular { jacobian: s.jacobian.clone() },
        limit_vars,
        annihilated: annihilated_of(&survivors),
        survivors,
        density: LimitDensity::Constant(Q::one() / &s.jacobian),
        n_prime: np,
        labels: chart.labels.clone(),
        source: chart.source.clone(),
        validation: None,
    })
}

fn star(spec: &SchrodingerSpec, exponent: impl Fn(u32) -> Q) -> StarFunction {
    let n = spec.n();
    let mut sources: Vec<&MultiPoly> = Vec::new();
    if !spec.v().is_zero() {
        sources.push(spec.v());
    }
    let t = spec.tensor();
    let upper: Vec<MultiPoly> = t.upper().into_iter().filter(|p| !p.is_zero()).cloned().collect();
    sources.extend(upper.iter());
    let mut terms = Vec::new();
    for p in sources {
        for (alpha, d) in all_derivatives(p) {
            terms.push((d, exponent(alpha.iter().sum())));
        }
    }
    StarFunction::new(n, terms)
}

/// Σ_α |∂^αV|^{1/2} + Σ_{j<k} Σ_α |∂^α b_jk|^{1/2}.
pub fn phi_star(spec: &SchrodingerSpec) -> StarFunction {
    star(spec, |_| Q::new(1.into(), 2.into()))
}

/// The same sums with exponents 1/(|α|+2).
pub fn psi_star(spec: &SchrodingerSpec) -> StarFunction {
    star(spec, |k| Q::new(1.into(), (k + 2).into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Degeneration {
    Strong,
    WeakIntermediate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaEstimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// G₂/G₁ at the largest sampled λ.
    pub last_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegenerationReport {
    pub g1: CountingCurve,
    pub g2: CountingCurve,
    pub fit1: Option<PowerLogFit>,
    pub fit2: Option<PowerLogFit>,
    pub classification: Degeneration,
    pub kappa: KappaEstimate,
    /// Slope of log(G₂/G₁) against log λ with its 95% half-width.
    pub slope: f64,
    pub slope_halfwidth: f64,
    /// Sampled points violating termwise dominance of Ψ* by Φ*.
    pub dominance_violations: usize,
}

impl DegenerationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Log-ratio slope separating power divergence from convergence.
pub const DIVERGENCE_SLOPE: f64 = 0.15;

pub fn classify(spec: &SchrodingerSpec, lambdas: &[f64], samples: usize, seed: u64) -> Result<DegenerationReport, ScalingError> {
    let phi = phi_star(spec);
    let psi = psi_star(spec);
    let g1 = phi.growth(lambdas, samples, seed)?;
    let g2 = psi.growth(lambdas, samples, seed.wrapping_add(1))?;
    let pairs: Vec<(f64, f64)> = g1
        .points
        .iter()
        .zip(&g2.points)
        .filter(|(a, b)| a.value > 0.0 && b.value > 0.0)
        .map(|(a, b)| (a.lambda, b.value / a.value))
        .collect();
    if pairs.len() < 3 {
        return Err(ScalingError::Fit(FitError::InsufficientSpan {
            points: pairs.len(),
            decades: 0.0,
            min_points: 3,
            min_decades: 0.0,
        }));
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let lr: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let slope_fit = line_fit(&lx, &lr);
    let hw = slope_fit.slope_halfwidth(0.95);
    // ratio ≈ κ + c·h(λ), h = 1/log λ or λ^{−1/2}, whichever leaves the smaller residual
    let r: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let kfit = [
        lx.iter().map(|l| 1.0 / l).collect::<Vec<f64>>(),
        pairs.iter().map(|p| p.0.powf(-0.5)).collect(),
    ]
    .iter()
    .map(|h| line_fit(h, &r))
    .min_by(|a, b| a.residual.total_cmp(&b.residual))
    .unwrap();
    let khw = kfit.intercept_halfwidth(0.95);
    let last_ratio = *r.last().unwrap();
    let mut report = DegenerationReport {
        fit1: fit(&g1, None).ok(),
        fit2: fit(&g2, None).ok(),
        dominance_violations: dominance_violations(&phi, &psi, lambdas, seed),
        g1,
        g2,
        classification: Degeneration::WeakIntermediate,
        kappa: KappaEstimate { value: kfit.intercept, lo: kfit.intercept - khw, hi: kfit.intercept + khw, last_ratio },
        slope: slope_fit.slope,
        slope_halfwidth: hw,
    };
    if slope_fit.slope - hw > DIVERGENCE_SLOPE {
        report.classification = Degeneration::Strong;
        report.kappa = KappaEstimate { value: 1.0, lo: 1.0, hi: 1.0, last_ratio };
        Ok(report)
    } else if slope_fit.slope + hw < DIVERGENCE_SLOPE {
        Ok(report)
    } else {
        Err(ScalingError::InconclusiveClassification { slope: slope_fit.slope, halfwidth: hw, report: Box::new(report) })
    }
}

/// Points with Φ* ≤ λ and every nonconstant term magnitude ≥ 1 must satisfy Ψ* ≤ λ.
fn dominance_violations(phi: &StarFunction, psi: &StarFunction, lambdas: &[f64], seed: u64) -> usize {
    use rand::{Rng, SeedableRng};
    let Some(&lambda) = lambdas.first() else { return 0 };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xd0d0);
    let polys: Vec<_> = phi.terms.iter().filter(|(p, _)| !p.is_constant()).map(|(p, _)| p.compile()).collect();
    let r = lambda * lambda;
    let mut bad = 0;
    let mut x = vec![0.0; phi.nvars];
    for _ in 0..20_000 {
        for v in x.iter_mut() {
            *v = rng.gen_range(-r..r);
        }
        if phi.eval(&x) > lambda || polys.iter().any(|p| p.eval(&x).abs() < 1.0) {
            continue;
        }
        if psi.eval(&x) > lambda * (1.0 + 1e-12) && phi.constants_dominate() {
            bad += 1;
        }
    }
    bad
}

#[cfg(test)]
mod tests;
