//! Exact multivariate polynomials with rational coefficients.

mod parse;
mod weights;

pub use parse::parse;
pub use weights::{quasi_weights, AdmissibleSet, WeightVector};

use crate::exact::{q_to_f64, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{index} at position {pos} out of range (nvars = {nvars})")]
    VariableOutOfRange { index: usize, pos: usize, nvars: usize },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("generators are not quasi-homogeneous for any positive weight")]
    NotQuasiHomogeneous,
    #[error("empty generator list or zero generator")]
    ZeroGenerator,
}

/// Exponent multi-index, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(n: usize) -> Self {
        Mono(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `nvars` variables; no stored coefficient is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Mono, Q>,
}

/// Result of a floating point evaluation; the only lossy path out of this module.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Approx(pub f64);

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = MultiPoly::zero(nvars);
        p.add_term(Mono::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        MultiPoly::constant(nvars, Q::one())
    }

    /// The variable x_j, 1-based.
    pub fn var(nvars: usize, j: usize) -> Self {
        assert!(j >= 1 && j <= nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[j - 1] = 1;
        MultiPoly::monomial(Mono(e), Q::one())
    }

    pub fn monomial(m: Mono, c: Q) -> Self {
        let mut p = MultiPoly::zero(m.0.len());
        p.add_term(m, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = MultiPoly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(Mono(e), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&Mono::one(self.nvars))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Mono::degree)
    }

    /// Largest monomial in graded-lex order with its coefficient.
    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn degree_in(&self, j: usize) -> u32 {
        self.terms.keys().map(|m| m.0[j - 1]).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars, "nvars mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut out = MultiPoly::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Exact partial derivative with respect to x_j, 1-based.
    pub fn partial(&self, j: usize) -> MultiPoly {
        assert!(j >= 1 && j <= self.nvars, "variable index out of range");
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[j - 1];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[j - 1] -= 1;
            out.add_term(Mono(d), c * Q::from_integer(BigInt::from(e)));
        }
        out
    }

    /// ∂^α p for a multi-index α.
    pub fn partial_multi(&self, alpha: &[u32]) -> MultiPoly {
        let mut p = self.clone();
        for (j, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                if p.is_zero() {
                    return p;
                }
                p = p.partial(j + 1);
            }
        }
        p
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (1..=self.nvars).map(|j| self.partial(j)).collect()
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.nvars);
        let mut s = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_f64(&self, x: &[f64]) -> Approx {
        Approx(self.compile().eval(x))
    }

    pub fn compile(&self) -> F64Poly {
        F64Poly::new(self)
    }

    /// Substitute x_j ↦ images[j-1]; images share a common variable count.
    pub fn compose(&self, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut out = MultiPoly::zero(target);
        // cache powers per variable
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|p| vec![MultiPoly::one(p.nvars)])
            .collect();
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (j, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[j].len() <= e as usize {
                    let next = powers[j].last().unwrap().mul(&images[j]);
                    powers[j].push(next);
                }
                t = t.mul(&powers[j][e as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    /// Re-embed into `nvars` variables, mapping variable j to `map[j]` (0-based).
    pub fn embed(&self, nvars: usize, map: &[usize]) -> MultiPoly {
        assert_eq!(map.len(), self.nvars);
        let mut out = MultiPoly::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; nvars];
            for (j, &k) in map.iter().enumerate() {
                e[k] += m.0[j];
            }
            out.add_term(Mono(e), c.clone());
        }
        out
    }

    /// Homogeneous component of total degree d.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Part of the polynomial with quasi-degree exactly `d` under weights γ.
    pub fn quasi_part(&self, gamma: &[Q], d: &Q) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| &quasi_degree(m, gamma) == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest quasi-degree of a term, None for the zero polynomial.
    pub fn max_quasi_degree(&self, gamma: &[Q]) -> Option<Q> {
        self.terms.keys().map(|m| quasi_degree(m, gamma)).max()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Mono> {
        self.terms.keys()
    }

    /// Multiply by the scalar making the leading coefficient 1.
    pub fn monic(&self) -> MultiPoly {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

pub fn quasi_degree(m: &Mono, gamma: &[Q]) -> Q {
    m.0.iter()
        .zip(gamma)
        .fold(Q::zero(), |acc, (&e, g)| acc + g * Q::from_integer(BigInt::from(e)))
}

fn fmt_coeff(c: &Q) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for MultiPoly {
    /// Canonical form: descending graded-lex, `c*x1^2*x2` style.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        format!("x{}", j + 1)
                    } else {
                        format!("x{}^{}", j + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_coeff(&a))?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_coeff(&a), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Floating point evaluator with precomputed power tables.
#[derive(Clone, Debug)]
pub struct F64Poly {
    nvars: usize,
    max_exp: Vec<usize>,
    terms: Vec<(f64, Vec<u32>)>,
}

impl F64Poly {
    pub fn new(p: &MultiPoly) -> Self {
        let terms: Vec<(f64, Vec<u32>)> = p
            .terms
            .iter()
            .map(|(m, c)| (q_to_f64(c), m.0.clone()))
            .collect();
        let max_exp = (0..p.nvars)
            .map(|j| terms.iter().map(|(_, e)| e[j] as usize).max().unwrap_or(0))
            .collect();
        F64Poly { nvars: p.nvars, max_exp, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        match self.terms.len() {
            0 => return 0.0,
            1 => {
                let (c, e) = &self.terms[0];
                return e
                    .iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32));
            }
            _ => {}
        }
        let mut pw: [[f64; 24]; 4] = [[1.0; 24]; 4];
        if self.nvars <= 4 && self.max_exp.iter().all(|&m| m < 24) {
            for j in 0..self.nvars {
                for k in 1..=self.max_exp[j] {
                    pw[j][k] = pw[j][k - 1] * x[j];
                }
            }
            let mut s = 0.0;
            for (c, e) in &self.terms {
                let mut t = *c;
                for (j, &k) in e.iter().enumerate() {
                    t *= pw[j][k as usize];
                }
                s += t;
            }
            s
        } else {
            self.terms.iter().fold(0.0, |acc, (c, e)| {
                acc + e
                    .iter()
                    .zip(x)
                    .fold(*c, |t, (&k, &xi)| t * xi.powi(k as i32))
            })
        }
    }

    /// Upper bound of |p| on the box |x_j| ≤ r_j.
    pub fn abs_bound(&self, r: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (c, e)| {
            acc + e
                .iter()
                .zip(r)
                .fold(c.abs(), |t, (&k, &rj)| t * rj.powi(k as i32))
        })
    }
}

/// Integer-valued helper for multinomial factorials.
pub fn factorial(n: u32) -> Q {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= BigInt::from(k);
    }
    Q::from_integer(f)
}

/// All multi-indices α ≤ bound componentwise.
pub fn multi_indices_below(bound: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &b in bound {
        let mut next = Vec::new();
        for prefix in &out {
            for k in 0..=b {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// All distinct nonzero derivatives ∂^α p (α = 0 included) as (α, ∂^α p).
pub fn all_derivatives(p: &MultiPoly) -> Vec<(Vec<u32>, MultiPoly)> {
    let bound: Vec<u32> = (1..=p.nvars()).map(|j| p.degree_in(j)).collect();
    multi_indices_below(&bound)
        .into_iter()
        .filter_map(|a| {
            let d = p.partial_multi(&a);
            (!d.is_zero()).then_some((a, d))
        })
        .collect()
}

pub fn q_to_i64(x: &Q) -> Option<i64> {
    if x.denom().is_one() {
        x.numer().to_i64()
    } else {
        None
    }
}
