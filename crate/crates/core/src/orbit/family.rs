//! Decomposition of a limit measure into a family of orbits, for a closed catalog.

use super::{count_first_order, OrbitError, ReducedOperator};
use crate::exact::{in_span, q_from_f64, q_to_f64, Q};
use crate::liealg::{LieAlgebra, SchrodingerSpec};
use crate::poly::{Mono, MultiPoly};
use crate::scaling::{LimitKind, LimitMeasure};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Abelian,
    HeisenbergCdV,
    MonomialChain,
    TriangularChain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FamilyParams {
    /// Points (ξ, x) with the scalar ‖ξ‖² + V(x).
    Abelian { spec: SchrodingerSpec },
    /// Harmonic oscillators with frequencies from the spectrum of iB(x).
    HeisenbergCdV { spec: SchrodingerSpec, rank: usize },
    /// Chain of length p+1 with transverse power q < p.
    MonomialStrong { p: u32, q: u32 },
    /// Balanced block x₁ᵏx₂ᵏ.
    MonomialBalanced { k: u32 },
    /// ν = factor·|A|/(2π) dA dB, reduced operator −d² + (Az² + B)².
    Triangular { factor: Q },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamSpace {
    pub dim: usize,
    pub coords: Vec<String>,
    pub region: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuotientFamily {
    pub kind: FamilyKind,
    pub params: FamilyParams,
    pub param_space: ParamSpace,
}

#[derive(Serialize)]
struct FamilyJson<'a> {
    kind: FamilyKind,
    param_space: &'a ParamSpace,
    density: String,
    reduced_operator: String,
}

/// Product b₁⋯b_r of the positive eigenvalues of iB and the rank 2r.
pub fn landau_frequencies(b: &[Vec<f64>]) -> (Vec<f64>, usize) {
    let n = b.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    let m = DMatrix::from_fn(n, n, |i, j| b[i][j]);
    let norm = m.norm();
    if norm == 0.0 {
        return (Vec::new(), 0);
    }
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let nz: Vec<f64> = sv.into_iter().filter(|&s| s > 1e-10 * norm).collect();
    // singular values of a real antisymmetric matrix come in equal pairs
    let freqs: Vec<f64> = nz.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let r = nz.len() / 2;
    (freqs[..r].to_vec(), 2 * r)
}

fn is_two_step_central(g: &LieAlgebra) -> bool {
    let d = g.derived();
    let z = g.center();
    !d.is_empty() && d.iter().all(|v| in_span(&z, v))
}

fn is_filiform(g: &LieAlgebra) -> bool {
    let d = g.dim();
    if d < 3 {
        return false;
    }
    let mut expect = vec![d];
    expect.extend((0..=d - 2).rev());
    g.lower_central_series() == expect
}

fn unsupported(msg: impl Into<String>) -> OrbitError {
    OrbitError::UnsupportedStructure(msg.into())
}

fn structure_summary(g: &LieAlgebra) -> String {
    format!(
        "dim {}, lower central series {:?}, center dim {}",
        g.dim(),
        g.lower_central_series(),
        g.center().len()
    )
}

/// Match [L_a, L_b] = c₁X, [L_a, X] = c₂Y with all other brackets zero.
fn triangular_constants(g: &LieAlgebra) -> Option<(Q, Q)> {
    let fo = g.first_order_indices();
    let mu = g.mult_indices();
    if fo.len() != 2 || mu.len() != 2 || g.dim() != 4 {
        return None;
    }
    for &(a, b) in &[(fo[0], fo[1]), (fo[1], fo[0])] {
        for &(x, y) in &[(mu[0], mu[1]), (mu[1], mu[0])] {
            let single = |v: &[Q], k: usize| -> Option<Q> {
                let ok = v.iter().enumerate().all(|(i, c)| i == k || c.is_zero());
                (ok && !v[k].is_zero()).then(|| v[k].clone())
            };
            let Some(c1) = single(g.structure(a, b), x) else { continue };
            let Some(c2) = single(g.structure(a, x), y) else { continue };
            let zero = |i: usize, j: usize| g.structure(i, j).iter().all(Zero::is_zero);
            if zero(b, x) && zero(a, y) && zero(b, y) && zero(x, y) {
                return Some((c1, c2));
            }
        }
    }
    None
}

/// Quotient family for a limit measure on the reduced algebra `gbar`.
pub fn orbit_space(gbar: &LieAlgebra, mu0: &LimitMeasure) -> Result<QuotientFamily, OrbitError> {
    let shape = structure_summary(gbar);
    match &mu0.kind {
        LimitKind::QuasiDilation { .. } => {
            let spec = mu0
                .source
                .clone()
                .ok_or_else(|| unsupported("quasi-dilation limit without source operator"))?;
            let n = spec.n();
            if gbar.is_abelian() {
                let mut coords: Vec<String> = (1..=n).map(|j| format!("xi{j}")).collect();
                coords.extend((1..=n).map(|j| format!("x{j}")));
                return Ok(QuotientFamily {
                    kind: FamilyKind::Abelian,
                    params: FamilyParams::Abelian { spec },
                    param_space: ParamSpace { dim: 2 * n, coords, region: "R^2n".into() },
                });
            }
            if is_two_step_central(gbar) {
                let rank = generic_rank(&spec);
                if rank == 0 {
                    return Err(unsupported(format!("two-step algebra with vanishing generic field ({shape})")));
                }
                let free = n - rank;
                let mut coords: Vec<String> = (1..=free).map(|j| format!("xi''{j}")).collect();
                coords.extend((1..=n).map(|j| format!("x{j}")));
                return Ok(QuotientFamily {
                    kind: FamilyKind::HeisenbergCdV,
                    params: FamilyParams::HeisenbergCdV { spec, rank },
                    param_space: ParamSpace {
                        dim: free + n,
                        coords,
                        region: format!("R^{free} x {{x : rank B(x) = {rank}}}"),
                    },
                });
            }
            Err(unsupported(format!("quasi-dilation limit on a non-two-step algebra ({shape})")))
        }
        LimitKind::Monomial { k, l } => {
            if gbar.l0().is_some_and(|v| v.iter().any(|c| !c.is_zero())) {
                return Err(unsupported("monomial family with an electric potential"));
            }
            if k == l {
                let d = gbar.derived();
                if gbar.dim() != 3 || d.len() != 1 || !is_two_step_central(gbar) {
                    return Err(unsupported(format!("balanced monomial limit on {shape}")));
                }
                let fo = gbar.first_order_indices();
                let c = gbar.structure(fo[0], fo[1]).iter().find(|c| !c.is_zero()).cloned();
                if c.map_or(true, |c| c.abs() != Q::one()) {
                    return Err(unsupported("balanced monomial chain with non-unit bracket"));
                }
                return Ok(QuotientFamily {
                    kind: FamilyKind::MonomialChain,
                    params: FamilyParams::MonomialBalanced { k: *k },
                    param_space: ParamSpace { dim: 1, coords: vec!["y".into()], region: "R^x".into() },
                });
            }
            let (p, q) = if k > l { (*k, *l) } else { (*l, *k) };
            if gbar.dim() != p as usize + 3 || !is_filiform(gbar) || count_first_order(gbar) != 2 {
                return Err(unsupported(format!("monomial chain ({k},{l}) expected filiform of dim {}, got {shape}", p + 3)));
            }
            Ok(QuotientFamily {
                kind: FamilyKind::MonomialChain,
                params: FamilyParams::MonomialStrong { p, q },
                param_space: ParamSpace {
                    dim: 2,
                    coords: vec!["xi2".into(), "x2".into()],
                    region: "R x R^x".into(),
                },
            })
        }
        LimitKind::Triangular { jacobian } => {
            if gbar.l0().is_some_and(|v| v.iter().any(|c| !c.is_zero())) {
                return Err(unsupported("triangular family with an electric potential"));
            }
            if !is_filiform(gbar) {
                return Err(unsupported(format!("triangular limit on {shape}")));
            }
            let (c1, c2) = triangular_constants(gbar)
                .ok_or_else(|| unsupported(format!("triangular limit does not match the chain pattern ({shape})")))?;
            let factor = Q::from_integer(BigInt::from(4)) / (&c1 * &c1 * c2.abs() * jacobian.abs());
            Ok(QuotientFamily {
                kind: FamilyKind::TriangularChain,
                params: FamilyParams::Triangular { factor },
                param_space: ParamSpace { dim: 2, coords: vec!["A".into(), "B".into()], region: "R^x x R".into() },
            })
        }
    }
}

/// Maximal rank of B(x) at a few fixed rational points.
fn generic_rank(spec: &SchrodingerSpec) -> usize {
    let t = spec.tensor();
    let n = spec.n();
    let pts = [[3, -7, 5], [11, 2, -13], [-5, 17, 19]];
    pts.iter()
        .map(|p| {
            let x: Vec<Q> = (0..n).map(|j| Q::new(BigInt::from(p[j % 3]), BigInt::from(7 + j as i64))).collect();
            let rows: Vec<Vec<Q>> = (0..n).map(|j| (0..n).map(|k| t.get(j, k).eval(&x)).collect()).collect();
            crate::exact::QMatrix::from_rows(&rows, n).rank()
        })
        .max()
        .unwrap_or(0)
}

impl QuotientFamily {
    /// Density of ν against Lebesgue measure on the parameter space.
    pub fn nu_density(&self, q: &[f64]) -> f64 {
        match &self.params {
            FamilyParams::Abelian { spec } => (2.0 * PI).powi(-(spec.n() as i32)),
            FamilyParams::HeisenbergCdV { spec, rank } => {
                let n = spec.n();
                let free = n - rank;
                let x = &q[free..];
                let (b, r2) = landau_frequencies(&spec.tensor().eval_f64(x));
                if r2 != *rank {
                    return 0.0;
                }
                (2.0 * PI).powi(-((n - rank / 2) as i32)) * b.iter().product::<f64>()
            }
            FamilyParams::MonomialStrong { .. } => 1.0 / (2.0 * PI),
            FamilyParams::MonomialBalanced { k } => {
                let k = *k as f64;
                q[0].abs().powf(1.0 / k) / (PI * k * k)
            }
            FamilyParams::Triangular { factor } => q_to_f64(factor) * q[0].abs() / (2.0 * PI),
        }
    }

    pub fn density_expr(&self) -> String {
        match &self.params {
            FamilyParams::Abelian { spec } => format!("(2pi)^-{} dxi dx", spec.n()),
            FamilyParams::HeisenbergCdV { spec, rank } => {
                format!("(2pi)^-{} b_1(x)...b_{}(x) dxi'' dx", spec.n() - rank / 2, rank / 2)
            }
            FamilyParams::MonomialStrong { .. } => "(2pi)^-1 dxi2 dx2".into(),
            FamilyParams::MonomialBalanced { k } => format!("(pi*{})^-1 |y|^(1/{k}) dy", k * k),
            FamilyParams::Triangular { factor } => format!("{factor}*(2pi)^-1 |A| dA dB"),
        }
    }

    pub fn template(&self) -> String {
        match &self.params {
            FamilyParams::Abelian { .. } => "|xi|^2 + V(x)".into(),
            FamilyParams::HeisenbergCdV { .. } => {
                "-Laplacian_y + sum_j b_j(x)^2 y_j^2 + |xi''|^2 + V(x)".into()
            }
            FamilyParams::MonomialStrong { p, q } => {
                format!("-d^2/dy^2 + (x2^{q}*y^{}/{} + xi2)^2", p + 1, p + 1)
            }
            FamilyParams::MonomialBalanced { .. } => "-d^2/dx^2 + y^2 x^2".into(),
            FamilyParams::Triangular { .. } => "-d^2/dz^2 + (A z^2 + B)^2".into(),
        }
    }

    /// The reduced operator over a parameter point.
    pub fn reduced_at(&self, q: &[Q]) -> ReducedOperator {
        let prov = format!("{:?} at {:?}", self.kind, q.iter().map(|v| v.to_string()).collect::<Vec<_>>());
        match &self.params {
            FamilyParams::Abelian { spec } => {
                let n = spec.n();
                let xi2 = q[..n].iter().fold(Q::zero(), |s, v| s + v * v);
                ReducedOperator::scalar(xi2 + spec.v().eval(&q[n..]), prov)
            }
            FamilyParams::HeisenbergCdV { spec, rank } => {
                let n = spec.n();
                let free = n - rank;
                let x: Vec<f64> = q[free..].iter().map(q_to_f64).collect();
                let (b, _) = landau_frequencies(&spec.tensor().eval_f64(&x));
                let r = rank / 2;
                let shift = q[..free].iter().fold(Q::zero(), |s, v| s + v * v) + spec.v().eval(&q[free..]);
                let nv = r.max(1);
                let mut w = MultiPoly::constant(nv, shift);
                for (j, bj) in b.iter().enumerate().take(r) {
                    let y = MultiPoly::var(nv, j + 1);
                    w = w.add(&y.mul(&y).scale(&q_from_f64(bj * bj)));
                }
                ReducedOperator { n_red: r, a_red: vec![MultiPoly::zero(nv); r], w_red: w, provenance: prov }
            }
            FamilyParams::MonomialStrong { p, q: qq } => {
                let xi2 = &q[0];
                let x2 = &q[1];
                let c = num_traits::pow(x2.clone(), *qq as usize) / Q::from_integer(BigInt::from(p + 1));
                let inner = MultiPoly::monomial(Mono(vec![p + 1]), c).add(&MultiPoly::constant(1, xi2.clone()));
                one_dim(inner.mul(&inner), prov)
            }
            FamilyParams::MonomialBalanced { .. } => {
                let y = &q[0];
                one_dim(MultiPoly::monomial(Mono(vec![2]), y * y), prov)
            }
            FamilyParams::Triangular { .. } => {
                let inner = MultiPoly::monomial(Mono(vec![2]), q[0].clone())
                    .add(&MultiPoly::constant(1, q[1].clone()));
                one_dim(inner.mul(&inner), prov)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FamilyJson {
            kind: self.kind,
            param_space: &self.param_space,
            density: self.density_expr(),
            reduced_operator: self.template(),
        })
        .expect("serializable")
    }
}

fn one_dim(w: MultiPoly, provenance: String) -> ReducedOperator {
    ReducedOperator { n_red: 1, a_red: vec![MultiPoly::zero(1)], w_red: w, provenance }
}
