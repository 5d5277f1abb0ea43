//! Coadjoint orbit charts, Kostant measures and reduced operators.

mod family;

pub use family::{landau_frequencies, orbit_space, FamilyKind, FamilyParams, ParamSpace, QuotientFamily};

use crate::exact::{span_basis, QMatrix, Q};
use crate::liealg::{
    poincare_gauge, BasisKind, LieAlgebra, LieError, LinFunctional, MagneticTensor, Polarization,
    SchrodingerSpec,
};
use crate::poly::{factorial, Mono, MultiPoly};
use num_traits::Zero;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbitError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("polarization is not abelian after the quotient pass")]
    NonAbelianPolarization,
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
}

/// Polynomial parameterization φ(ξ, x) of a coadjoint orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitChart {
    /// Number n' of complementary directions; the chart has 2n' parameters.
    pub n_prime: usize,
    /// One coordinate per basis element of 𝔤, in the variables (ξ₁,…,ξ_n', x₁,…,x_n').
    pub coords: Vec<MultiPoly>,
    pub base_point: LinFunctional,
    /// Basis indices of the complementary Lⱼ.
    pub complement: Vec<usize>,
    pub labels: Vec<String>,
    #[serde(skip)]
    pub source: Option<SchrodingerSpec>,
}

impl OrbitChart {
    /// Kostant normalization (2π)^{−n'}.
    pub fn normalization(&self) -> f64 {
        (2.0 * PI).powi(-(self.n_prime as i32))
    }

    pub fn eval(&self, params: &[Q]) -> Vec<Q> {
        self.coords.iter().map(|p| p.eval(params)).collect()
    }
}

/// Taylor coefficients Σ_α f((ad L)^α h) x^α/α! over the complementary directions.
fn taylor(g: &LieAlgebra, f: &LinFunctional, h: &[Q], complement: &[usize]) -> MultiPoly {
    let np = complement.len();
    let d = g.dim();
    let mut list: Vec<(Vec<u32>, Vec<Q>)> = vec![(vec![0; np], h.to_vec())];
    for (j, &c) in complement.iter().enumerate() {
        let lc = g.basis_vector(c);
        let mut next = Vec::new();
        for (alpha, v) in list {
            let mut cur = v;
            let mut a = alpha;
            for _ in 0..=d {
                if cur.iter().all(Zero::is_zero) {
                    break;
                }
                next.push((a.clone(), cur.clone()));
                cur = g.bracket(&lc, &cur);
                a[j] += 1;
            }
        }
        list = next;
    }
    let mut p = MultiPoly::zero(np.max(1));
    for (alpha, v) in list {
        let c = f.eval(&v);
        if c.is_zero() {
            continue;
        }
        let fact = alpha.iter().fold(Q::from_integer(1.into()), |acc, &a| acc * factorial(a));
        let mut e = alpha.clone();
        if np == 0 {
            e = vec![0];
        }
        p = p.add(&MultiPoly::monomial(Mono(e), c / fact));
    }
    p
}

/// Ideal generated by `vs`.
fn ideal_closure(g: &LieAlgebra, vs: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let d = g.dim();
    let all = g.full_basis();
    let mut cur = span_basis(vs, d);
    loop {
        let mut next = cur.clone();
        next.extend(g.bracket_span(&all, &cur));
        let next = span_basis(&next, d);
        if next.len() == cur.len() {
            return cur;
        }
        cur = next;
    }
}

/// Coordinate polynomials in x (n' variables) and the linear ξ-part of every basis element.
struct Decomposed {
    x_part: Vec<MultiPoly>,
    xi_part: Vec<Vec<Q>>,
}

fn decompose(g: &LieAlgebra, pol: &Polarization, f: &LinFunctional) -> Result<Decomposed, OrbitError> {
    let d = g.dim();
    let np = pol.complement.len();
    if !g.bracket_span(&pol.basis, &pol.basis).is_empty() {
        return Err(OrbitError::NonAbelianPolarization);
    }
    let hp: Vec<MultiPoly> = pol.basis.iter().map(|h| taylor(g, f, h, &pol.complement)).collect();
    let mut cols: Vec<Vec<Q>> = pol.basis.clone();
    cols.extend(pol.complement.iter().map(|&c| g.basis_vector(c)));
    let m = QMatrix::from_rows(&cols, d).transpose();
    let mut x_part = Vec::with_capacity(d);
    let mut xi_part = Vec::with_capacity(d);
    for i in 0..d {
        let sol = m
            .solve(&g.basis_vector(i))
            .ok_or(LieError::InternalInconsistency { reached: cols.len(), target: d })?;
        let mut p = MultiPoly::zero(np.max(1));
        for (c, hpol) in sol.iter().zip(&hp) {
            if !c.is_zero() {
                p = p.add(&hpol.scale(c));
            }
        }
        x_part.push(p);
        xi_part.push(sol[pol.basis.len()..].to_vec());
    }
    Ok(Decomposed { x_part, xi_part })
}

/// Orbit chart through f₀ for an abelian ideal polarization.
pub fn chart(g: &LieAlgebra, pol: &Polarization, f0: &LinFunctional) -> Result<OrbitChart, OrbitError> {
    if !g.bracket_span(&pol.basis, &pol.basis).is_empty() {
        return chart_via_quotient(g, pol, f0);
    }
    let dec = decompose(g, pol, f0)?;
    let np = pol.complement.len();
    let nparams = (2 * np).max(1);
    let x_map: Vec<usize> = (0..np.max(1)).map(|j| np + j).collect();
    let coords = (0..g.dim())
        .map(|i| {
            let mut p = if np == 0 {
                MultiPoly::constant(1, dec.x_part[i].constant_term())
            } else {
                dec.x_part[i].embed(nparams, &x_map[..np])
            };
            for (k, c) in dec.xi_part[i].iter().enumerate() {
                if !c.is_zero() {
                    p = p.add(&MultiPoly::var(nparams, k + 1).scale(c));
                }
            }
            p
        })
        .collect();
    Ok(OrbitChart {
        n_prime: np,
        coords,
        base_point: f0.clone(),
        complement: pol.complement.clone(),
        labels: g.labels().to_vec(),
        source: g.source().cloned(),
    })
}

fn chart_via_quotient(g: &LieAlgebra, pol: &Polarization, f0: &LinFunctional) -> Result<OrbitChart, OrbitError> {
    let ideal = ideal_closure(g, &g.bracket_span(&pol.basis, &pol.basis));
    if ideal.iter().any(|v| !f0.eval(v).is_zero()) {
        return Err(OrbitError::NonAbelianPolarization);
    }
    let (gq, proj) = g.quotient_map(&ideal)?;
    let keep = g.quotient_keep(&ideal);
    let basis = span_basis(&pol.basis.iter().map(|v| proj.mul_vec(v)).collect::<Vec<_>>(), gq.dim());
    let complement = pol
        .complement
        .iter()
        .map(|c| keep.iter().position(|k| k == c))
        .collect::<Option<Vec<usize>>>()
        .ok_or(OrbitError::NonAbelianPolarization)?;
    // f₀ vanishes on the ideal, so it is determined by its values on the kept basis
    let fq = LinFunctional { values: keep.iter().map(|&k| f0.values[k].clone()).collect() };
    let qpol = Polarization { basis, complement };
    if !gq.bracket_span(&qpol.basis, &qpol.basis).is_empty() {
        return Err(OrbitError::NonAbelianPolarization);
    }
    let qc = chart(&gq, &qpol, &fq)?;
    let nparams = qc.coords.first().map(MultiPoly::nvars).unwrap_or(1);
    let coords = (0..g.dim())
        .map(|i| {
            let coeffs = proj.mul_vec(&g.basis_vector(i));
            coeffs
                .iter()
                .zip(&qc.coords)
                .fold(MultiPoly::zero(nparams), |acc, (c, p)| acc.add(&p.scale(c)))
        })
        .collect();
    Ok(OrbitChart {
        n_prime: qc.n_prime,
        coords,
        base_point: f0.clone(),
        complement: pol.complement.clone(),
        labels: g.labels().to_vec(),
        source: g.source().cloned(),
    })
}

/// Algebra of the operator and its orbit chart through the base point.
pub fn base_chart(spec: &SchrodingerSpec) -> Result<(LieAlgebra, OrbitChart), OrbitError> {
    let g = LieAlgebra::build(spec);
    let f0 = g.base_point();
    let pol = g.polarization(&f0)?;
    let c = chart(&g, &pol, &f0)?;
    Ok((g, c))
}

/// Operator realizing the irreducible representation attached to f.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedOperator {
    pub n_red: usize,
    pub a_red: Vec<MultiPoly>,
    pub w_red: MultiPoly,
    pub provenance: String,
}

impl ReducedOperator {
    pub fn scalar(value: Q, provenance: impl Into<String>) -> Self {
        ReducedOperator {
            n_red: 0,
            a_red: Vec::new(),
            w_red: MultiPoly::constant(1, value),
            provenance: provenance.into(),
        }
    }

    /// One-dimensional potential, the magnetic part being a pure gauge there.
    pub fn potential_1d(&self) -> Option<&MultiPoly> {
        (self.n_red == 1).then_some(&self.w_red)
    }
}

/// Image of −ΣLⱼ² − i·L₀ in the representation induced from the polarization.
pub fn realize_reduced(g: &LieAlgebra, pol: &Polarization, f: &LinFunctional) -> Result<ReducedOperator, OrbitError> {
    let dec = decompose(g, pol, f)?;
    let np = pol.complement.len();
    let nv = np.max(1);
    let mut w = MultiPoly::zero(nv);
    for i in g.first_order_indices() {
        if pol.complement.contains(&i) {
            continue;
        }
        if dec.xi_part[i].iter().any(|c| !c.is_zero()) {
            return Err(OrbitError::UnsupportedStructure(format!(
                "{} mixes with complementary directions",
                g.labels()[i]
            )));
        }
        let p = &dec.x_part[i];
        w = w.add(&p.mul(p));
    }
    if let Some(l0) = g.l0() {
        for (c, p) in l0.iter().zip(&dec.x_part) {
            if !c.is_zero() {
                w = w.add(&p.scale(c));
            }
        }
    }
    let mut a_red = Vec::new();
    if np > 0 {
        // ∂ⱼa_k − ∂_k aⱼ = p_{[L_cⱼ, L_c_k]}, so b_jk = p_{[L_c_k, L_cⱼ]}
        let mut entries = vec![vec![MultiPoly::zero(np); np]; np];
        for j in 0..np {
            for k in 0..np {
                if j == k {
                    continue;
                }
                let br = g.bracket(&g.basis_vector(pol.complement[k]), &g.basis_vector(pol.complement[j]));
                let mut p = MultiPoly::zero(np);
                for (c, xp) in br.iter().zip(&dec.x_part) {
                    if !c.is_zero() {
                        p = p.add(&xp.scale(c));
                    }
                }
                entries[j][k] = p;
            }
        }
        a_red = poincare_gauge(&MagneticTensor { entries })?;
    }
    let labels: Vec<&str> = pol.complement.iter().map(|&c| g.labels()[c].as_str()).collect();
    Ok(ReducedOperator {
        n_red: np,
        a_red,
        w_red: w,
        provenance: format!("induced from polarization, free directions [{}]", labels.join(", ")),
    })
}

/// Basis kinds counted by role, used in structural checks.
pub(crate) fn count_first_order(g: &LieAlgebra) -> usize {
    g.kinds().iter().filter(|k| matches!(k, BasisKind::FirstOrder(_))).count()
}
