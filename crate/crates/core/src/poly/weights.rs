//! Quasi-homogeneity weights: solve ⟨β, γ⟩ = 1 over all monomials, γ > 0.

use super::{quasi_degree, MultiPoly, PolyError};
use crate::exact::{dot, QMatrix, Q};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AdmissibleSet {
    Point,
    /// Affine set `particular + span(directions)` intersected with the open positive orthant.
    Family { dim: usize, particular: Vec<String>, directions: Vec<Vec<String>> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub gamma: Vec<Q>,
    pub admissible: AdmissibleSet,
}

impl WeightVector {
    /// |γ| = Σ γ_j.
    pub fn total(&self) -> Q {
        self.gamma.iter().fold(Q::zero(), |a, g| a + g)
    }

    pub fn gamma_f64(&self) -> Vec<f64> {
        self.gamma.iter().map(crate::exact::q_to_f64).collect()
    }

    /// Whether P(δ_t x) = t·P(x) holds identically.
    pub fn is_homogeneous_of_degree_one(&self, p: &MultiPoly) -> bool {
        p.monomials().all(|m| quasi_degree(m, &self.gamma).is_one())
    }
}

pub fn quasi_weights(generators: &[MultiPoly]) -> Result<WeightVector, PolyError> {
    if generators.is_empty() || generators.iter().any(MultiPoly::is_zero) {
        return Err(PolyError::ZeroGenerator);
    }
    let n = generators[0].nvars();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for g in generators {
        for m in g.monomials() {
            let r: Vec<Q> = m.0.iter().map(|&e| Q::from_integer(e.into())).collect();
            if !rows.contains(&r) {
                rows.push(r);
            }
        }
    }
    // a variable absent from every generator has no defined weight
    if (0..n).any(|j| rows.iter().all(|r| r[j].is_zero())) {
        return Err(PolyError::NotQuasiHomogeneous);
    }
    let a = QMatrix::from_rows(&rows, n);
    let ones = vec![Q::one(); rows.len()];
    let x0 = a.min_norm_solution(&ones).ok_or(PolyError::NotQuasiHomogeneous)?;
    let null = a.nullspace();
    if null.is_empty() {
        if x0.iter().all(Signed::is_positive) {
            return Ok(WeightVector { gamma: x0, admissible: AdmissibleSet::Point });
        }
        return Err(PolyError::NotQuasiHomogeneous);
    }
    let admissible = AdmissibleSet::Family {
        dim: null.len(),
        particular: x0.iter().map(|v| v.to_string()).collect(),
        directions: null.iter().map(|d| d.iter().map(|v| v.to_string()).collect()).collect(),
    };
    if x0.iter().all(Signed::is_positive) {
        return Ok(WeightVector { gamma: x0, admissible });
    }
    let gamma = positive_representative(&a, &ones, n).ok_or(PolyError::NotQuasiHomogeneous)?;
    Ok(WeightVector { gamma, admissible })
}

/// Nonnegative min-norm point and feasible vertices, by face enumeration.
fn positive_representative(a: &QMatrix, b: &[Q], n: usize) -> Option<Vec<Q>> {
    let mut best: Option<(Q, Vec<Q>)> = None;
    let mut vertices: Vec<Vec<Q>> = Vec::new();
    for mask in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|j| mask & (1 << j) == 0).collect();
        if free.is_empty() {
            continue;
        }
        let mut sub = QMatrix::zeros(a.rows, free.len());
        for i in 0..a.rows {
            for (c, &j) in free.iter().enumerate() {
                sub.set(i, c, a.get(i, j).clone());
            }
        }
        let Some(y) = sub.min_norm_solution(b) else { continue };
        if y.iter().any(Signed::is_negative) {
            continue;
        }
        let mut x = vec![Q::zero(); n];
        for (c, &j) in free.iter().enumerate() {
            x[j] = y[c].clone();
        }
        let norm = dot(&x, &x);
        if best.as_ref().map_or(true, |(bn, _)| &norm < bn) {
            best = Some((norm, x.clone()));
        }
        if sub.rank() == free.len() && !vertices.contains(&x) {
            vertices.push(x);
        }
    }
    let (_, opt) = best?;
    if vertices.is_empty() {
        return None;
    }
    let k = Q::from_integer((vertices.len() as i64).into());
    let bary: Vec<Q> = (0..n)
        .map(|j| vertices.iter().fold(Q::zero(), |s, v| s + &v[j]) / &k)
        .collect();
    let two = Q::from_integer(2.into());
    let mid: Vec<Q> = opt.iter().zip(&bary).map(|(o, c)| (o + c) / &two).collect();
    mid.iter().all(Signed::is_positive).then_some(mid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qr};
    use crate::poly::parse;

    #[test]
    fn unique_weight() {
        let w = quasi_weights(&[parse("x1^2 - x2", 2).unwrap()]).unwrap();
        assert_eq!(w.gamma, vec![qr(1, 2), q(1)]);
        assert_eq!(w.admissible, AdmissibleSet::Point);
    }

    #[test]
    fn sum_of_squares() {
        let w = quasi_weights(&[parse("x1^2 + x2^2 + x3^2", 3).unwrap()]).unwrap();
        assert_eq!(w.gamma, vec![qr(1, 2); 3]);
    }

    #[test]
    fn one_parameter_family() {
        let w = quasi_weights(&[parse("x1^2*x2", 2).unwrap()]).unwrap();
        assert_eq!(w.gamma, vec![qr(2, 5), qr(1, 5)]);
        assert!(matches!(w.admissible, AdmissibleSet::Family { dim: 1, .. }));
    }

    #[test]
    fn constant_term_rejected() {
        assert_eq!(
            quasi_weights(&[parse("x1^2 + x2^2 + 1", 2).unwrap()]),
            Err(PolyError::NotQuasiHomogeneous)
        );
        assert_eq!(quasi_weights(&[parse("x1^2", 2).unwrap()]), Err(PolyError::NotQuasiHomogeneous));
    }

    #[test]
    fn several_generators() {
        let g = [parse("x1*x2^3 + x1^4*x2^0*x3", 3).unwrap(), parse("x3^2", 3).unwrap()];
        let w = quasi_weights(&g).unwrap();
        assert!(w.gamma.iter().all(Signed::is_positive));
        for p in &g {
            assert!(w.is_homogeneous_of_degree_one(p));
        }
    }

    #[test]
    fn boundary_optimum_is_pushed_inside() {
        // min-norm point of this admissible line has a negative second entry
        let g = parse("x1*x2^2*x3^4 + x1^2*x3^3", 3).unwrap();
        let w = quasi_weights(&[g.clone()]).unwrap();
        assert!(w.gamma.iter().all(Signed::is_positive));
        assert!(w.is_homogeneous_of_degree_one(&g));
    }
}
