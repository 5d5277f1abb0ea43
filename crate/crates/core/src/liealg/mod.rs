//! The nilpotent Lie algebra generated by Lⱼ = ∂ⱼ + i aⱼ and L₀ = i V.

mod spec;

pub use spec::{is_gauge_invariant_pair, poincare_gauge, MagneticTensor, SchrodingerSpec};

use crate::exact::{dot, in_span, span_basis, QMatrix, Q};
use crate::poly::{all_derivatives, Mono, MultiPoly, PolyError};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LieError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("magnetic tensor is not closed")]
    NotClosed,
    #[error("structure constants violate {0}")]
    InvalidStructure(String),
    #[error("isotropic extension stalled at dimension {reached} below {target}")]
    InternalInconsistency { reached: usize, target: usize },
    #[error("polarization is not abelian")]
    NonAbelianPolarization,
}

/// Role of a basis element: a first-order direction Lⱼ or a multiplication operator i·m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BasisKind {
    /// Lⱼ, 1-based index into the original coordinates.
    FirstOrder(usize),
    /// i·m with m the stored polynomial, when known.
    Mult,
}

/// Finite-dimensional real Lie algebra given by rational structure constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    labels: Vec<String>,
    kinds: Vec<BasisKind>,
    polys: Vec<Option<MultiPoly>>,
    /// consts[i][j][k]: [Eᵢ, Eⱼ] = Σₖ c Eₖ.
    consts: Vec<Vec<Vec<Q>>>,
    l0: Option<Vec<Q>>,
    nvars: usize,
    source: Option<SchrodingerSpec>,
}

/// A point of 𝔤* as values on the basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinFunctional {
    pub values: Vec<Q>,
}

impl LinFunctional {
    pub fn zero(dim: usize) -> Self {
        LinFunctional { values: vec![Q::zero(); dim] }
    }

    pub fn eval(&self, v: &[Q]) -> Q {
        dot(&self.values, v)
    }
}

/// Polarization together with complementary first-order directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarization {
    /// RREF basis of 𝔥 in E-coordinates.
    pub basis: Vec<Vec<Q>>,
    /// Indices into E of the complementary Lⱼ, in basis order.
    pub complement: Vec<usize>,
}

#[derive(Serialize)]
struct StructureTable<'a> {
    labels: &'a [String],
    brackets: Vec<(usize, usize, usize, String)>,
    l0: Option<Vec<String>>,
}

fn unit(dim: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); dim];
    v[i] = Q::one();
    v
}

/// Canonical basis of the span of `polys` and all their partial derivatives,
/// ordered by descending leading monomial.
pub fn derivative_closure(polys: &[MultiPoly], nvars: usize) -> Vec<MultiPoly> {
    let mut all = Vec::new();
    for p in polys {
        all.extend(all_derivatives(p).into_iter().map(|(_, d)| d));
    }
    reduced_basis(&all, nvars)
}

fn reduced_basis(polys: &[MultiPoly], nvars: usize) -> Vec<MultiPoly> {
    let monos: BTreeSet<Mono> = polys.iter().flat_map(|p| p.monomials().cloned()).collect();
    let monos: Vec<Mono> = monos.into_iter().rev().collect();
    if monos.is_empty() {
        return Vec::new();
    }
    let rows: Vec<Vec<Q>> = polys.iter().map(|p| monos.iter().map(|m| p.coeff(m)).collect()).collect();
    span_basis(&rows, monos.len())
        .into_iter()
        .map(|r| {
            MultiPoly::from_terms(
                nvars,
                monos.iter().zip(r).map(|(m, c)| (m.0.clone(), c)),
            )
        })
        .collect()
}

/// Coordinates of `p` in a basis produced by [`reduced_basis`], or None if outside the span.
fn coords_in(basis: &[MultiPoly], p: &MultiPoly) -> Option<Vec<Q>> {
    let mut rest = p.clone();
    let mut c = Vec::with_capacity(basis.len());
    for b in basis {
        let (lead, lc) = b.leading().expect("basis polynomial is nonzero");
        let k = rest.coeff(lead) / lc;
        if !k.is_zero() {
            rest = rest.sub(&b.scale(&k));
        }
        c.push(k);
    }
    rest.is_zero().then_some(c)
}

impl LieAlgebra {
    /// Algebra generated by the operator's first-order and multiplication parts.
    pub fn build(spec: &SchrodingerSpec) -> LieAlgebra {
        let n = spec.n();
        let mult = derivative_closure(&spec.generators(), n);
        let k = mult.len();
        let dim = n + k;
        let mut labels: Vec<String> = (1..=n).map(|j| format!("L{j}")).collect();
        labels.extend(mult.iter().map(|m| format!("i*({m})")));
        let mut kinds: Vec<BasisKind> = (1..=n).map(BasisKind::FirstOrder).collect();
        kinds.extend(std::iter::repeat(BasisKind::Mult).take(k));
        let mut polys: Vec<Option<MultiPoly>> = vec![None; n];
        polys.extend(mult.iter().cloned().map(Some));

        let expand = |p: &MultiPoly| -> Vec<Q> {
            let c = coords_in(&mult, p).expect("closure contains every bracket");
            let mut v = vec![Q::zero(); dim];
            v[n..].clone_from_slice(&c);
            v
        };
        let zero = vec![Q::zero(); dim];
        let mut consts = vec![vec![zero.clone(); dim]; dim];
        let a = spec.a();
        for j in 0..n {
            for l in j + 1..n {
                // [Lⱼ, L_l] = i(∂ⱼa_l − ∂_l aⱼ)
                let p = a[l].partial(j + 1).sub(&a[j].partial(l + 1));
                let v = expand(&p);
                consts[l][j] = v.iter().map(|c| -c).collect();
                consts[j][l] = v;
            }
            for (r, m) in mult.iter().enumerate() {
                let v = expand(&m.partial(j + 1));
                consts[n + r][j] = v.iter().map(|c| -c).collect();
                consts[j][n + r] = v;
            }
        }
        let l0 = (!spec.v().is_zero()).then(|| expand(spec.v()));
        LieAlgebra { labels, kinds, polys, consts, l0, nvars: n, source: Some(spec.clone()) }
    }

    /// Algebra from explicit structure constants, checked for antisymmetry and Jacobi.
    pub fn from_structure(
        labels: Vec<String>,
        kinds: Vec<BasisKind>,
        brackets: &[(usize, usize, usize, Q)],
    ) -> Result<LieAlgebra, LieError> {
        let dim = labels.len();
        if kinds.len() != dim {
            return Err(LieError::DimensionMismatch { expected: dim, found: kinds.len() });
        }
        let mut consts = vec![vec![vec![Q::zero(); dim]; dim]; dim];
        for (i, j, k, c) in brackets {
            if *i >= dim || *j >= dim || *k >= dim {
                return Err(LieError::InvalidStructure(format!("index out of range in ({i},{j},{k})")));
            }
            consts[*i][*j][*k] += c;
            consts[*j][*i][*k] -= c;
        }
        let nvars = kinds.iter().filter(|k| matches!(k, BasisKind::FirstOrder(_))).count();
        let g = LieAlgebra { labels, kinds, polys: vec![None; dim], consts, l0: None, nvars, source: None };
        g.check_axioms()?;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Number of first-order basis elements.
    pub fn n(&self) -> usize {
        self.kinds.iter().filter(|k| matches!(k, BasisKind::FirstOrder(_))).count()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kinds(&self) -> &[BasisKind] {
        &self.kinds
    }

    pub fn first_order_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| matches!(self.kinds[i], BasisKind::FirstOrder(_))).collect()
    }

    pub fn mult_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.kinds[i] == BasisKind::Mult).collect()
    }

    /// Polynomial m of a multiplication element i·m, when known.
    pub fn poly(&self, i: usize) -> Option<&MultiPoly> {
        self.polys[i].as_ref()
    }

    /// The multiplication basis (m₁,…,m_K).
    pub fn mult_basis(&self) -> Vec<MultiPoly> {
        self.mult_indices().iter().filter_map(|&i| self.polys[i].clone()).collect()
    }

    /// The operator this algebra was built from, if any.
    pub fn source(&self) -> Option<&SchrodingerSpec> {
        self.source.as_ref()
    }

    pub fn l0(&self) -> Option<&[Q]> {
        self.l0.as_deref()
    }

    pub fn structure(&self, i: usize, j: usize) -> &[Q] {
        &self.consts[i][j]
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let d = self.dim();
        let mut out = vec![Q::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let f = &x[i] * &y[j];
                for (o, c) in out.iter_mut().zip(&self.consts[i][j]) {
                    if !c.is_zero() {
                        *o += &f * c;
                    }
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Q> {
        unit(self.dim(), i)
    }

    /// Exact antisymmetry and Jacobi on all basis triples.
    pub fn check_axioms(&self) -> Result<(), LieError> {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                let s: Vec<Q> = self.consts[i][j].iter().zip(&self.consts[j][i]).map(|(a, b)| a + b).collect();
                if s.iter().any(|c| !c.is_zero()) {
                    return Err(LieError::InvalidStructure(format!("antisymmetry at ({i},{j})")));
                }
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let (ei, ej, ek) = (unit(d, i), unit(d, j), unit(d, k));
                    let a = self.bracket(&ei, &self.bracket(&ej, &ek));
                    let b = self.bracket(&ej, &self.bracket(&ek, &ei));
                    let c = self.bracket(&ek, &self.bracket(&ei, &ej));
                    if (0..d).any(|t| !(&a[t] + &b[t] + &c[t]).is_zero()) {
                        return Err(LieError::InvalidStructure(format!("Jacobi at ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical basis of [A, B] for subspaces given by spanning vectors.
    pub fn bracket_span(&self, a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
        let mut out = Vec::new();
        for x in a {
            for y in b {
                out.push(self.bracket(x, y));
            }
        }
        span_basis(&out, self.dim())
    }

    pub fn full_basis(&self) -> Vec<Vec<Q>> {
        (0..self.dim()).map(|i| unit(self.dim(), i)).collect()
    }

    pub fn derived(&self) -> Vec<Vec<Q>> {
        let all = self.full_basis();
        self.bracket_span(&all, &all)
    }

    /// Dimensions of the lower central series g ⊇ [g,g] ⊇ …, ending at 0 or stalling.
    pub fn lower_central_series(&self) -> Vec<usize> {
        let all = self.full_basis();
        let mut cur = all.clone();
        let mut dims = vec![cur.len()];
        loop {
            let next = self.bracket_span(&all, &cur);
            if next.len() == cur.len() {
                return dims;
            }
            dims.push(next.len());
            if next.is_empty() {
                return dims;
            }
            cur = next;
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.consts.iter().flatten().flatten().all(Zero::is_zero)
    }

    /// Canonical basis of the center.
    pub fn center(&self) -> Vec<Vec<Q>> {
        let d = self.dim();
        // rows: for each j, k the coefficient of E_k in [x, E_j] = Σ_i x_i c_ijk
        let mut rows = Vec::new();
        for j in 0..d {
            for k in 0..d {
                rows.push((0..d).map(|i| self.consts[i][j][k].clone()).collect::<Vec<Q>>());
            }
        }
        let ns = QMatrix::from_rows(&rows, d).nullspace();
        span_basis(&ns, d)
    }

    /// Whether span(vs) is an ideal.
    pub fn is_ideal(&self, vs: &[Vec<Q>]) -> bool {
        let all = self.full_basis();
        self.bracket_span(&all, vs).iter().all(|w| in_span(vs, w))
    }

    /// Base point f₀: f₀(Lⱼ) = 0, f₀(i·P) = P(0).
    pub fn base_point(&self) -> LinFunctional {
        let values = (0..self.dim())
            .map(|i| match (&self.kinds[i], &self.polys[i]) {
                (BasisKind::Mult, Some(p)) => p.constant_term(),
                _ => Q::zero(),
            })
            .collect();
        LinFunctional { values }
    }

    /// B_f(Eᵢ, Eⱼ) = f([Eᵢ, Eⱼ]).
    pub fn skew_form(&self, f: &LinFunctional) -> QMatrix {
        let d = self.dim();
        let mut m = QMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, f.eval(&self.consts[i][j]));
            }
        }
        m
    }

    /// Radical 𝔤(f) of B_f.
    pub fn radical(&self, f: &LinFunctional) -> Vec<Vec<Q>> {
        span_basis(&self.skew_form(f).nullspace(), self.dim())
    }

    /// Maximal isotropic ideal containing the multiplication part, [𝔤,𝔤], L₀ and 𝔤(f).
    pub fn polarization(&self, f: &LinFunctional) -> Result<Polarization, LieError> {
        let d = self.dim();
        let form = self.skew_form(f);
        let radical = span_basis(&form.nullspace(), d);
        let target = (d + radical.len()) / 2;
        let mut seed: Vec<Vec<Q>> = self.mult_indices().iter().map(|&i| unit(d, i)).collect();
        seed.extend(self.derived());
        seed.extend(radical.iter().cloned());
        if let Some(l0) = &self.l0 {
            seed.push(l0.clone());
        }
        let mut w = span_basis(&seed, d);
        let perp = |w: &[Vec<Q>]| -> Vec<Vec<Q>> {
            if w.is_empty() {
                return (0..d).map(|i| unit(d, i)).collect();
            }
            let rows: Vec<Vec<Q>> = w.iter().map(|x| form.transpose().mul_vec(x)).collect();
            span_basis(&QMatrix::from_rows(&rows, d).nullspace(), d)
        };
        for x in &w {
            for y in &w {
                if !dot(&form.mul_vec(y), x).is_zero() {
                    return Err(LieError::InvalidStructure("seed is not isotropic".into()));
                }
            }
        }
        while w.len() < target {
            let p = perp(&w);
            let candidate = (0..d)
                .map(|i| unit(d, i))
                .find(|e| in_span(&p, e) && !in_span(&w, e))
                .or_else(|| p.iter().find(|v| !in_span(&w, v)).cloned());
            match candidate {
                Some(v) => {
                    w.push(v);
                    w = span_basis(&w, d);
                }
                None => return Err(LieError::InternalInconsistency { reached: w.len(), target }),
            }
        }
        if w.len() != target {
            return Err(LieError::InternalInconsistency { reached: w.len(), target });
        }
        let mut span = w.clone();
        let mut complement = Vec::new();
        for i in self.first_order_indices() {
            let e = unit(d, i);
            if !in_span(&span, &e) {
                span.push(e);
                complement.push(i);
            }
        }
        if QMatrix::from_rows(&span, d).rank() != d {
            return Err(LieError::InternalInconsistency { reached: span.len(), target: d });
        }
        Ok(Polarization { basis: w, complement })
    }

    /// Quotient by the ideal spanned by `ideal`; basis elements outside it are kept greedily.
    pub fn quotient(&self, ideal: &[Vec<Q>]) -> Result<LieAlgebra, LieError> {
        self.quotient_map(ideal).map(|(g, _)| g)
    }

    /// Quotient algebra together with the projection matrix from E-coordinates.
    pub fn quotient_map(&self, ideal: &[Vec<Q>]) -> Result<(LieAlgebra, QMatrix), LieError> {
        let d = self.dim();
        let ideal = span_basis(ideal, d);
        if !self.is_ideal(&ideal) {
            return Err(LieError::InvalidStructure("quotient by a non-ideal".into()));
        }
        let keep = self.quotient_keep(&ideal);
        // columns: kept basis vectors, then ideal basis
        let mut cols: Vec<Vec<Q>> = keep.iter().map(|&i| unit(d, i)).collect();
        cols.extend(ideal.iter().cloned());
        let inv = QMatrix::from_rows(&cols, d)
            .transpose()
            .inverse()
            .expect("kept basis and ideal span the algebra");
        let dk = keep.len();
        let mut proj = QMatrix::zeros(dk, d);
        for r in 0..dk {
            for c in 0..d {
                proj.set(r, c, inv.get(r, c).clone());
            }
        }
        let mut consts = vec![vec![vec![Q::zero(); dk]; dk]; dk];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                consts[a][b] = proj.mul_vec(&self.consts[i][j]);
            }
        }
        let g = LieAlgebra {
            labels: keep.iter().map(|&i| format!("{}~", self.labels[i])).collect(),
            kinds: keep.iter().map(|&i| self.kinds[i].clone()).collect(),
            polys: keep.iter().map(|&i| self.polys[i].clone()).collect(),
            consts,
            l0: self.l0.as_ref().map(|v| proj.mul_vec(v)),
            nvars: self.nvars,
            source: self.source.clone(),
        };
        Ok((g, proj))
    }

    /// Indices of the basis elements that survive in `self.quotient(ideal)`.
    pub fn quotient_keep(&self, ideal: &[Vec<Q>]) -> Vec<usize> {
        let d = self.dim();
        let mut span = span_basis(ideal, d);
        let mut keep = Vec::new();
        for i in 0..d {
            let e = unit(d, i);
            if !in_span(&span, &e) {
                span.push(e);
                keep.push(i);
            }
        }
        keep
    }

    /// Exact coordinates of i·p in the multiplication basis, if p lies in its span.
    pub fn mult_coords(&self, p: &MultiPoly) -> Option<Vec<Q>> {
        let idx = self.mult_indices();
        let basis: Vec<MultiPoly> = idx.iter().filter_map(|&i| self.polys[i].clone()).collect();
        if basis.len() != idx.len() {
            return None;
        }
        let c = coords_in(&basis, p)?;
        let mut v = vec![Q::zero(); self.dim()];
        for (&i, ci) in idx.iter().zip(c) {
            v[i] = ci;
        }
        Some(v)
    }

    /// JSON table of labels and nonzero triples (i, j, k, c) with i < j.
    pub fn to_json(&self) -> String {
        let d = self.dim();
        let mut brackets = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for k in 0..d {
                    let c = &self.consts[i][j][k];
                    if !c.is_zero() {
                        brackets.push((i, j, k, c.to_string()));
                    }
                }
            }
        }
        let t = StructureTable {
            labels: &self.labels,
            brackets,
            l0: self.l0.as_ref().map(|v| v.iter().map(|c| c.to_string()).collect()),
        };
        serde_json::to_string_pretty(&t).expect("serializable")
    }
}

/// Rational subspace S = {y : y·∇P ≡ 0 for P ∈ {V, b_jk}}.
pub fn degenerate_directions(spec: &SchrodingerSpec) -> Vec<Vec<Q>> {
    let n = spec.n();
    let mut rows = Vec::new();
    for p in spec.generators() {
        let grads = p.gradient();
        let monos: BTreeSet<Mono> = grads.iter().flat_map(|g| g.monomials().cloned()).collect();
        for m in monos {
            rows.push(grads.iter().map(|g| g.coeff(&m)).collect::<Vec<Q>>());
        }
    }
    if rows.is_empty() {
        return (0..n).map(|i| unit(n, i)).collect();
    }
    QMatrix::from_rows(&rows, n).nullspace()
}

/// Discreteness of the spectrum: no direction along which V and B are constant.
pub fn discreteness(spec: &SchrodingerSpec) -> bool {
    degenerate_directions(spec).is_empty()
}

#[cfg(test)]
mod tests;
