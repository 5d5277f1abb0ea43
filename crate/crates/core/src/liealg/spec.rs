//! Schrödinger operators −Σ(∂ⱼ + i aⱼ)² + V with polynomial data.

use super::LieError;
use crate::exact::Q;
use crate::poly::{parse, MultiPoly, PolyError};
use num_bigint::BigInt;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchrodingerSpec {
    n: usize,
    a: Vec<MultiPoly>,
    v: MultiPoly,
}

/// Antisymmetric matrix of polynomials, b_jk = ∂_k a_j − ∂_j a_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagneticTensor {
    pub entries: Vec<Vec<MultiPoly>>,
}

impl MagneticTensor {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, j: usize, k: usize) -> &MultiPoly {
        &self.entries[j][k]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(MultiPoly::is_zero)
    }

    /// Entries above the diagonal, row by row.
    pub fn upper(&self) -> Vec<&MultiPoly> {
        let n = self.n();
        (0..n)
            .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
            .map(|(j, k)| &self.entries[j][k])
            .collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|p| p.eval_f64(x).0).collect())
            .collect()
    }
}

impl SchrodingerSpec {
    pub fn new(a: Vec<MultiPoly>, v: MultiPoly) -> Result<Self, LieError> {
        let n = v.nvars();
        if n == 0 {
            return Err(LieError::DimensionMismatch { expected: 1, found: 0 });
        }
        if a.len() != n {
            return Err(LieError::DimensionMismatch { expected: n, found: a.len() });
        }
        if let Some(p) = a.iter().find(|p| p.nvars() != n) {
            return Err(LieError::DimensionMismatch { expected: n, found: p.nvars() });
        }
        Ok(SchrodingerSpec { n, a, v })
    }

    /// Parse potentials from expression strings; an empty `a` means no magnetic field.
    pub fn parse(n: usize, a: &[&str], v: &str) -> Result<Self, LieError> {
        let v = parse(v, n)?;
        let a = if a.is_empty() {
            vec![MultiPoly::zero(n); n]
        } else {
            a.iter().map(|s| parse(s, n)).collect::<Result<Vec<_>, PolyError>>()?
        };
        SchrodingerSpec::new(a, v)
    }

    pub fn electric(v: MultiPoly) -> Self {
        let n = v.nvars();
        SchrodingerSpec { n, a: vec![MultiPoly::zero(n); n], v }
    }

    /// Two-dimensional field b = ∂₁a₂ − ∂₂a₁ in the Poincaré gauge.
    pub fn from_field_2d(b: MultiPoly, v: MultiPoly) -> Result<Self, LieError> {
        if b.nvars() != 2 || v.nvars() != 2 {
            return Err(LieError::DimensionMismatch { expected: 2, found: b.nvars() });
        }
        let t = MagneticTensor {
            entries: vec![
                vec![MultiPoly::zero(2), b.neg()],
                vec![b, MultiPoly::zero(2)],
            ],
        };
        SchrodingerSpec::new(poincare_gauge(&t)?, v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[MultiPoly] {
        &self.a
    }

    pub fn v(&self) -> &MultiPoly {
        &self.v
    }

    pub fn has_magnetic_field(&self) -> bool {
        !self.tensor().is_zero()
    }

    pub fn tensor(&self) -> MagneticTensor {
        let n = self.n;
        let entries = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| self.a[j].partial(k + 1).sub(&self.a[k].partial(j + 1)))
                    .collect()
            })
            .collect();
        MagneticTensor { entries }
    }

    /// Two-dimensional field ∂₁a₂ − ∂₂a₁.
    pub fn field_2d(&self) -> Option<MultiPoly> {
        (self.n == 2).then(|| self.tensor().entries[1][0].clone())
    }

    /// The same operator after the gauge change a ↦ a + ∇φ.
    pub fn gauge_transform(&self, phi: &MultiPoly) -> Self {
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, aj)| aj.add(&phi.partial(j + 1)))
            .collect();
        SchrodingerSpec { n: self.n, a, v: self.v.clone() }
    }

    /// V together with the upper tensor entries, skipping zeros.
    pub fn generators(&self) -> Vec<MultiPoly> {
        let mut g = Vec::new();
        if !self.v.is_zero() {
            g.push(self.v.clone());
        }
        for b in self.tensor().upper() {
            if !b.is_zero() {
                g.push(b.clone());
            }
        }
        g
    }
}

/// a_j(x) = Σ_k x_k ∫₀¹ t b_jk(tx) dt, which satisfies ∂_k a_j − ∂_j a_k = b_jk for closed B.
pub fn poincare_gauge(t: &MagneticTensor) -> Result<Vec<MultiPoly>, LieError> {
    let n = t.n();
    let mut a = vec![MultiPoly::zero(n); n];
    for (j, aj) in a.iter_mut().enumerate() {
        for k in 0..n {
            let b = t.get(j, k);
            if b.is_zero() {
                continue;
            }
            let mut integ = MultiPoly::zero(n);
            for (m, c) in b.terms() {
                let f = Q::new(BigInt::from(1), BigInt::from(m.degree() + 2));
                integ = integ.add(&MultiPoly::monomial(m.clone(), c * f));
            }
            *aj = aj.add(&MultiPoly::var(n, k + 1).mul(&integ));
        }
    }
    let check = SchrodingerSpec { n, a: a.clone(), v: MultiPoly::zero(n) }.tensor();
    if &check != t {
        return Err(LieError::NotClosed);
    }
    Ok(a)
}

/// Whether two specs have the same V and the same magnetic tensor.
pub fn is_gauge_invariant_pair(s1: &SchrodingerSpec, s2: &SchrodingerSpec) -> Result<bool, LieError> {
    if s1.n != s2.n {
        return Err(LieError::DimensionMismatch { expected: s1.n, found: s2.n });
    }
    Ok(s1.v == s2.v && s1.tensor() == s2.tensor())
}
