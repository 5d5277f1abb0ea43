//! Triangular polynomial substitutions yᵢ = uᵢ·x_{vᵢ} + gᵢ(x_{v₁},…,x_{vᵢ₋₁}).

use crate::exact::Q;
use crate::poly::{Mono, MultiPoly};
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct TriangularSubst {
    /// (polynomial index, variable index, leading coefficient) in pick order.
    pub picks: Vec<(usize, usize, Q)>,
    /// xⱼ as polynomials in y, yᵢ being the i-th pick.
    pub inverse: Vec<MultiPoly>,
    /// Product of the leading coefficients, dy = |jacobian|·dx.
    pub jacobian: Q,
}

impl TriangularSubst {
    pub fn apply(&self, p: &MultiPoly) -> MultiPoly {
        p.compose(&self.inverse)
    }

    pub fn is_identity(&self) -> bool {
        self.picks.iter().all(|(_, _, u)| u.is_one())
            && self.inverse.iter().enumerate().all(|(j, p)| {
                let k = self.picks.iter().position(|&(_, v, _)| v == j);
                k.is_some_and(|k| *p == MultiPoly::var(p.nvars(), k + 1))
            })
    }
}

/// p = u·x_v + g with g free of x_v and supported on `allowed`.
fn split_linear(p: &MultiPoly, v: usize, allowed: &[bool]) -> Option<(Q, MultiPoly)> {
    let n = p.nvars();
    let mut unit = Mono(vec![0; n]);
    unit.0[v] = 1;
    let u = p.coeff(&unit);
    if u.is_zero() {
        return None;
    }
    for (m, _) in p.terms() {
        if *m == unit {
            continue;
        }
        if m.0.iter().enumerate().any(|(j, &e)| e > 0 && (j == v || !allowed[j])) {
            return None;
        }
    }
    let g = p.sub(&MultiPoly::monomial(unit, u.clone()));
    Some((u, g))
}

/// Greedy triangular substitution covering every variable, if one exists.
pub fn triangular_substitution(polys: &[MultiPoly], nvars: usize) -> Option<TriangularSubst> {
    let mut selected = vec![false; nvars];
    let mut used = vec![false; polys.len()];
    let mut picks = Vec::new();
    let mut inverse = vec![MultiPoly::zero(nvars); nvars];
    while picks.len() < nvars {
        let mut found = None;
        'outer: for (i, p) in polys.iter().enumerate() {
            if used[i] || p.is_constant() {
                continue;
            }
            for v in 0..nvars {
                if selected[v] {
                    continue;
                }
                if let Some((u, g)) = split_linear(p, v, &selected) {
                    found = Some((i, v, u, g));
                    break 'outer;
                }
            }
        }
        let (i, v, u, g) = found?;
        let k = picks.len();
        let gy = g.compose(&inverse);
        inverse[v] = MultiPoly::var(nvars, k + 1).sub(&gy).scale(&(Q::one() / &u));
        used[i] = true;
        selected[v] = true;
        picks.push((i, v, u));
    }
    let jacobian = picks.iter().fold(Q::one(), |acc, (_, _, u)| acc * u);
    Some(TriangularSubst { picks, inverse, jacobian: jacobian.abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;
    use crate::poly::parse;

    #[test]
    fn parabola_substitution() {
        let polys = vec![parse("x1^2 - x2", 2).unwrap(), parse("x1", 2).unwrap(), MultiPoly::one(2)];
        let s = triangular_substitution(&polys, 2).unwrap();
        assert_eq!(s.jacobian, q(1));
        assert_eq!(s.apply(&polys[0]), parse("x2", 2).unwrap());
        assert_eq!(s.apply(&polys[1]), parse("x1", 2).unwrap());
    }

    #[test]
    fn product_has_no_substitution_beyond_identity() {
        let polys = vec![parse("x1*x2", 2).unwrap(), parse("x1", 2).unwrap(), parse("x2", 2).unwrap()];
        let s = triangular_substitution(&polys, 2).unwrap();
        assert!(s.is_identity());
        assert_eq!(s.apply(&polys[0]), polys[0]);
        assert!(triangular_substitution(&polys[..1], 2).is_none());
    }
}
