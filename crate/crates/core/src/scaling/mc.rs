//! Monte Carlo volumes of polynomial sublevel sets.

use super::subst::triangular_substitution;
use super::ScalingError;
use crate::curve::CountingCurve;
use crate::exact::{q_to_f64, Q};
use crate::poly::{F64Poly, Mono, MultiPoly};
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BLOCK: usize = 4096;

/// Volume of the unit ball in ℝᵐ.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(m - 2) * 2.0 * std::f64::consts::PI / m as f64,
    }
}

/// Estimate ∫ f over the box Π[−Rⱼ, Rⱼ] with an equal mixture of a uniform proposal and two
/// log-radial proposals with density ∝ 1/(|x| + ε), ε = 1 and ε = 1/R.
///
/// Returns (mean, standard error). Blocks draw from independent ChaCha streams.
pub fn integrate_box<F>(f: F, radii: &[f64], samples: usize, seed: u64, stream: u64) -> (f64, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = radii.len();
    if n == 0 {
        return (f(&[]), 0.0);
    }
    let eps: Vec<[f64; 2]> = radii.iter().map(|&r| [1.0, 1.0 / r.max(1.0)]).collect();
    let logs: Vec<[f64; 2]> = radii
        .iter()
        .zip(&eps)
        .map(|(r, e)| [(r / e[0]).ln_1p(), (r / e[1]).ln_1p()])
        .collect();
    let unif_density: f64 = radii.iter().map(|r| 1.0 / (2.0 * r)).product();
    let blocks = samples.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((stream << 24) | b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut x = vec![0.0; n];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let comp = rng.gen_range(0..3usize);
                for j in 0..n {
                    let u: f64 = rng.gen();
                    x[j] = if comp == 0 {
                        radii[j] * (2.0 * u - 1.0)
                    } else {
                        let e = eps[j][comp - 1];
                        let mag = e * (u * logs[j][comp - 1]).exp_m1();
                        if rng.gen_bool(0.5) {
                            mag
                        } else {
                            -mag
                        }
                    };
                }
                let v = f(&x);
                if v == 0.0 {
                    continue;
                }
                let mut q = unif_density;
                for c in 0..2 {
                    q += x
                        .iter()
                        .enumerate()
                        .map(|(j, xj)| 1.0 / (2.0 * (xj.abs() + eps[j][c]) * logs[j][c]))
                        .product::<f64>();
                }
                let w = 3.0 * v / q;
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    let m = samples as f64;
    let mean = s / m;
    let var = (s2 / m - mean * mean).max(0.0);
    (mean, (var / m).sqrt())
}

/// Half-widths of a box containing {|Pᵣ| ≤ Tᵣ}, via coordinates bounding one variable alone.
pub fn bounding_radii(constraints: &[(MultiPoly, f64)], nvars: usize) -> Option<Vec<f64>> {
    let mut r = vec![f64::INFINITY; nvars];
    loop {
        let mut progress = false;
        for (p, t) in constraints {
            // Σ cⱼ xⱼ^{2mⱼ} with positive coefficients bounds each variable it contains
            // plus a constant, which shifts the level
            let separable = p.terms().all(|(m, c)| {
                m.degree() == 0
                    || (c.is_positive() && m.0.iter().filter(|&&e| e > 0).count() == 1 && m.degree() % 2 == 0)
            });
            if separable {
                let level = (t - p.terms().filter(|(m, _)| m.degree() == 0).map(|(_, c)| q_to_f64(c)).sum::<f64>()).max(0.0);
                for (m, c) in p.terms().filter(|(m, _)| m.degree() > 0) {
                    let j = m.0.iter().position(|&e| e > 0).unwrap();
                    let bound = (level / q_to_f64(c)).powf(1.0 / m.degree() as f64);
                    if bound < r[j] {
                        progress |= !r[j].is_finite();
                        r[j] = bound;
                    }
                }
                continue;
            }
            for j in 0..nvars {
                if p.degree_in(j + 1) == 0 {
                    continue;
                }
                let mut pure = None;
                let mut ok = true;
                for (m, c) in p.terms() {
                    if m.0[j] == 0 {
                        if m.0.iter().enumerate().any(|(k, &e)| e > 0 && !r[k].is_finite()) {
                            ok = false;
                        }
                    } else if m.0.iter().enumerate().all(|(k, &e)| k == j || e == 0) && pure.is_none() {
                        pure = Some((m.0[j], q_to_f64(c).abs()));
                    } else {
                        ok = false;
                    }
                }
                let (Some((d, u)), true) = (pure, ok) else { continue };
                let mut e = vec![0; nvars];
                e[j] = d;
                let m = Mono(e);
                let g = p.sub(&MultiPoly::monomial(m.clone(), p.coeff(&m)));
                let finite: Vec<f64> = r.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
                let bound = ((t + g.compile().abs_bound(&finite)) / u).powf(1.0 / d as f64);
                if bound < r[j] {
                    if !r[j].is_finite() {
                        progress = true;
                    }
                    r[j] = bound;
                }
            }
        }
        if r.iter().all(|v| v.is_finite()) {
            return Some(r);
        }
        if !progress {
            return None;
        }
    }
}

fn restrict(p: &MultiPoly, keep: &[usize]) -> MultiPoly {
    MultiPoly::from_terms(
        keep.len().max(1),
        p.terms().map(|(m, c)| {
            let mut e: Vec<u32> = keep.iter().map(|&k| m.0[k]).collect();
            if e.is_empty() {
                e.push(0);
            }
            (e, c.clone())
        }),
    )
}

/// Sum-of-squares sublevel problem after integrating out the purely linear directions.
struct SquaresProblem {
    ball_dims: usize,
    /// 1/|Π scale factors| from linear directions and the substitution.
    factor: f64,
    polys: Vec<MultiPoly>,
    compiled: Vec<F64Poly>,
    nvars: usize,
}

impl SquaresProblem {
    fn new(coords: &[MultiPoly]) -> Self {
        let nv = coords.first().map(MultiPoly::nvars).unwrap_or(0);
        let mut linear = Vec::new();
        let mut factor = 1.0;
        let mut rest_idx = Vec::new();
        for (i, p) in coords.iter().enumerate() {
            let single = p.num_terms() == 1
                && p.terms().next().is_some_and(|(m, _)| m.degree() == 1)
                && {
                    let j = p.terms().next().unwrap().0 .0.iter().position(|&e| e == 1).unwrap();
                    coords.iter().enumerate().all(|(k, o)| k == i || o.degree_in(j + 1) == 0)
                        && !linear.contains(&j)
                };
            if single {
                let (m, c) = p.terms().next().unwrap();
                linear.push(m.0.iter().position(|&e| e == 1).unwrap());
                factor /= q_to_f64(c).abs();
            } else if !p.is_zero() {
                rest_idx.push(i);
            }
        }
        let keep: Vec<usize> = (0..nv).filter(|j| !linear.contains(j)).collect();
        let mut polys: Vec<MultiPoly> = rest_idx.iter().map(|&i| restrict(&coords[i], &keep)).collect();
        let nvars = keep.len();
        if nvars > 0 {
            if let Some(s) = triangular_substitution(&polys, nvars) {
                polys = polys.iter().map(|p| s.apply(p)).collect();
                factor /= q_to_f64(&s.jacobian);
            }
        }
        let compiled = polys.iter().map(MultiPoly::compile).collect();
        SquaresProblem { ball_dims: linear.len(), factor, polys, compiled, nvars }
    }

    fn volume(&self, lambda: f64, samples: usize, seed: u64, stream: u64) -> Result<(f64, f64), ScalingError> {
        let l2 = lambda * lambda;
        let m = self.ball_dims;
        let vb = unit_ball_volume(m);
        let integrand = |x: &[f64]| {
            let s: f64 = self.compiled.iter().map(|p| p.eval(x).powi(2)).sum();
            if s > l2 {
                0.0
            } else {
                vb * (l2 - s).powf(m as f64 / 2.0)
            }
        };
        if self.nvars == 0 {
            let x = [0.0];
            let s: f64 = self.compiled.iter().map(|p| p.eval(&x).powi(2)).sum();
            let v = if s > l2 { 0.0 } else { vb * (l2 - s).powf(m as f64 / 2.0) };
            return Ok((v * self.factor, 0.0));
        }
        let cons: Vec<(MultiPoly, f64)> = self.polys.iter().map(|p| (p.clone(), lambda)).collect();
        let radii = bounding_radii(&cons, self.nvars).ok_or(ScalingError::UnboundedSublevelSet)?;
        let (v, e) = integrate_box(integrand, &radii, samples, seed, stream);
        Ok((v * self.factor, e * self.factor))
    }
}

/// G(λ) = meas{z : Σ coordsⱼ(z)² ≤ λ²} on a grid of λ.
pub fn mc_growth(coords: &[MultiPoly], lambdas: &[f64], samples: usize, seed: u64) -> Result<CountingCurve, ScalingError> {
    let prob = SquaresProblem::new(coords);
    let mut curve = CountingCurve::new()
        .with_meta("seed", seed)
        .with_meta("samples", samples);
    for (i, &l) in lambdas.iter().enumerate() {
        let (v, e) = prob.volume(l, samples, seed, i as u64)?;
        curve.push(l, v, e, if e == 0.0 { "analytic" } else { "mc" });
    }
    Ok(curve)
}

/// Σ|Pᵣ|^{eᵣ} with the exact term list kept alongside evaluators; constant terms fold into one offset.
#[derive(Clone, Debug)]
pub struct StarFunction {
    pub nvars: usize,
    pub terms: Vec<(MultiPoly, Q)>,
    pub constant: f64,
    compiled: Vec<(F64Poly, f64)>,
}

impl StarFunction {
    pub fn new(nvars: usize, terms: Vec<(MultiPoly, Q)>) -> Self {
        let mut constant = 0.0;
        let mut compiled = Vec::new();
        for (p, e) in &terms {
            if p.is_constant() {
                constant += q_to_f64(&p.constant_term()).abs().powf(q_to_f64(e));
            } else {
                compiled.push((p.compile(), q_to_f64(e)));
            }
        }
        StarFunction { nvars, terms, constant, compiled }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.compiled.iter().map(|(p, e)| p.eval(x).abs().powf(*e)).sum::<f64>()
    }

    /// Whether every constant term has magnitude at least one.
    pub fn constants_dominate(&self) -> bool {
        self.terms
            .iter()
            .all(|(p, _)| !p.is_constant() || p.constant_term().abs() >= Q::one())
    }

    /// meas{x : Φ(x) ≤ λ} on a grid of λ, after a triangular substitution when one exists.
    pub fn growth(&self, lambdas: &[f64], samples: usize, seed: u64) -> Result<CountingCurve, ScalingError> {
        let moving: Vec<(MultiPoly, Q)> = self.terms.iter().filter(|(p, _)| !p.is_constant()).cloned().collect();
        let polys: Vec<MultiPoly> = moving.iter().map(|(p, _)| p.clone()).collect();
        let (polys, factor) = match triangular_substitution(&polys, self.nvars) {
            Some(s) => (polys.iter().map(|p| s.apply(p)).collect::<Vec<_>>(), 1.0 / q_to_f64(&s.jacobian)),
            None => (polys, 1.0),
        };
        let exps: Vec<f64> = moving.iter().map(|(_, e)| q_to_f64(e)).collect();
        let compiled: Vec<(F64Poly, f64)> = polys.iter().map(MultiPoly::compile).zip(exps.iter().copied()).collect();
        let eval = |x: &[f64]| self.constant + compiled.iter().map(|(p, e)| p.eval(x).abs().powf(*e)).sum::<f64>();
        let mut curve = CountingCurve::new()
            .with_meta("seed", seed)
            .with_meta("samples", samples);
        for (i, &l) in lambdas.iter().enumerate() {
            let mu = l - self.constant;
            if mu <= 0.0 {
                curve.push(l, 0.0, 0.0, "empty");
                continue;
            }
            let cons: Vec<(MultiPoly, f64)> = polys.iter().zip(&exps).map(|(p, e)| (p.clone(), mu.powf(1.0 / e))).collect();
            let radii = bounding_radii(&cons, self.nvars).ok_or(ScalingError::UnboundedSublevelSet)?;
            let (v, e) = integrate_box(|x| if eval(x) <= l { 1.0 } else { 0.0 }, &radii, samples, seed, i as u64);
            curve.push(l, v * factor, e * factor, "mc");
        }
        Ok(curve)
    }
}

impl std::fmt::Display for StarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(p, e)| format!("|{p}|^({e})")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse;

    #[test]
    fn interval_measure_is_exact() {
        let c = mc_growth(&[parse("x1", 1).unwrap()], &[5.0], 10_000, 1).unwrap();
        assert_eq!(c.points[0].value, 10.0);
    }

    #[test]
    fn disk_area_by_sampling() {
        let coords = [parse("x1", 2).unwrap().add(&parse("x2^2", 2).unwrap()), parse("x2", 2).unwrap()];
        // substitution y₁ = x₁ + x₂² turns this into the unit disk
        let c = mc_growth(&coords, &[1.0], 200_000, 3).unwrap();
        let p = &c.points[0];
        assert!((p.value - std::f64::consts::PI).abs() < 4.0 * p.error.max(1e-3), "{p:?}");
    }

    #[test]
    fn unbounded_set_is_reported() {
        let coords = [parse("x1*x2", 2).unwrap()];
        assert!(matches!(mc_growth(&coords, &[3.0], 10_000, 1), Err(ScalingError::UnboundedSublevelSet)));
    }

    #[test]
    fn identical_seeds_identical_curves() {
        let coords = [parse("x1^2 + x2^2", 2).unwrap(), parse("x1", 2).unwrap(), parse("x2", 2).unwrap()];
        let a = mc_growth(&coords, &[3.0, 7.0], 50_000, 11).unwrap();
        let b = mc_growth(&coords, &[3.0, 7.0], 50_000, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn radii_from_pure_powers() {
        let cons = vec![(parse("x1^2 - x2", 2).unwrap(), 4.0), (parse("x1", 2).unwrap(), 4.0)];
        let r = bounding_radii(&cons, 2).unwrap();
        assert_eq!(r, vec![4.0, 20.0]);
    }
}
