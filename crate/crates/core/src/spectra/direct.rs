//! Direct counts for −Σ(∂ⱼ + iaⱼ)² + V on box grids, by inertia of H_h − λ.

use super::band::BandMatrix;
use super::quad::kronrod15;
use super::sturm::{sturm_count, tridiagonal_eigenvalues, RESOLUTION};
use super::SpectraError;
use crate::curve::CountingCurve;
use crate::liealg::SchrodingerSpec;
use crate::poly::{F64Poly, MultiPoly};
use crate::scaling::{bounding_radii, psi_star};
use rayon::prelude::*;
use serde::Serialize;

/// Box [−L₁, L₁]×⋯ with mⱼ interior points per axis, spacing hⱼ = 2Lⱼ/(mⱼ+1), Dirichlet walls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridND {
    pub half_widths: Vec<f64>,
    pub points: Vec<usize>,
}

/// Doubles held by one band factorization.
pub const BAND_STORAGE_LIMIT: usize = 40_000_000;

/// Default truncation constant in Ψ*² ≤ C·λ.
pub const DEFAULT_CTRUNC: f64 = 16.0;

impl GridND {
    pub fn new(half_widths: Vec<f64>, points: Vec<usize>) -> Result<Self, SpectraError> {
        if half_widths.len() != points.len() || points.is_empty() {
            return Err(SpectraError::InvalidGrid("axis count mismatch".into()));
        }
        if half_widths.iter().any(|l| !(*l > 0.0 && l.is_finite())) || points.contains(&0) {
            return Err(SpectraError::InvalidGrid(format!("{half_widths:?} with {points:?} points")));
        }
        Ok(GridND { half_widths, points })
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn spacing(&self, j: usize) -> f64 {
        2.0 * self.half_widths[j] / (self.points[j] + 1) as f64
    }

    pub fn unknowns(&self) -> usize {
        self.points.iter().product()
    }

    /// Natural ordering puts the first axis fastest; the band spans all but the last axis.
    pub fn bandwidth(&self) -> usize {
        self.points[..self.dim() - 1].iter().product()
    }

    /// Meshes the box at `refine` times the resolution rules.
    pub fn resolved(spec: &SchrodingerSpec, half_widths: Vec<f64>, lambda: f64, refine: f64) -> Result<Self, SpectraError> {
        let limits = spacing_limits(spec, &half_widths, lambda);
        let points = half_widths
            .iter()
            .zip(&limits)
            .map(|(l, h)| ((2.0 * l * refine.max(1.0) / h).ceil() as usize).max(2) - 1)
            .collect();
        GridND::new(half_widths, points)
    }

    /// Truncation box of {Ψ*² ≤ C·λ}, meshed by the resolution rules.
    pub fn for_spec(spec: &SchrodingerSpec, lambda: f64, ctrunc: f64, refine: f64) -> Result<Self, SpectraError> {
        let psi = psi_star(spec);
        let s = ((ctrunc * lambda.max(0.0)).sqrt() - psi.constant).max(1e-3);
        let cons: Vec<(MultiPoly, f64)> = psi
            .terms
            .iter()
            .filter(|(p, _)| !p.is_constant())
            .map(|(p, e)| (p.clone(), s.powf(1.0 / crate::exact::q_to_f64(e))))
            .collect();
        let radii = bounding_radii(&cons, spec.n()).ok_or(SpectraError::UnboundedTruncation)?;
        GridND::resolved(spec, radii, lambda, refine)
    }

    /// h√λ ≤ 1/4 and h·max|∂ⱼV| ≤ max|V| on every axis.
    pub fn check(&self, spec: &SchrodingerSpec, lambda: f64) -> Result<(), SpectraError> {
        if self.dim() != spec.n() {
            return Err(SpectraError::InvalidGrid(format!("{} axes for {} variables", self.dim(), spec.n())));
        }
        let limits = spacing_limits(spec, &self.half_widths, lambda);
        for (axis, limit) in limits.into_iter().enumerate() {
            let h = self.spacing(axis);
            if h > limit * (1.0 + 1e-12) {
                return Err(SpectraError::GridTooCoarse { axis, h, limit });
            }
        }
        Ok(())
    }
}

fn spacing_limits(spec: &SchrodingerSpec, half_widths: &[f64], lambda: f64) -> Vec<f64> {
    let n = half_widths.len();
    let base = if lambda > 0.0 { RESOLUTION / lambda.sqrt() } else { f64::INFINITY };
    let v = spec.v().compile();
    let grads: Vec<F64Poly> = (1..=n).map(|j| spec.v().partial(j).compile()).collect();
    let per_axis = 17usize;
    let total = per_axis.pow(n as u32);
    let mut vmax = 0.0f64;
    let mut gmax = vec![0.0f64; n];
    let mut x = vec![0.0; n];
    for idx in 0..total {
        let mut r = idx;
        for j in 0..n {
            x[j] = half_widths[j] * (2.0 * (r % per_axis) as f64 / (per_axis - 1) as f64 - 1.0);
            r /= per_axis;
        }
        vmax = vmax.max(v.eval(&x).abs());
        for j in 0..n {
            gmax[j] = gmax[j].max(grads[j].eval(&x).abs());
        }
    }
    (0..n)
        .map(|j| {
            let p = if gmax[j] > 0.0 { vmax / gmax[j] } else { f64::INFINITY };
            base.min(p).min(half_widths[j])
        })
        .collect()
}

/// Sub-box of grid nodes: first node lo + h per axis.
#[derive(Clone, Debug)]
struct Lattice {
    lo: Vec<f64>,
    h: Vec<f64>,
    m: Vec<usize>,
}

impl Lattice {
    fn of(grid: &GridND) -> Self {
        let n = grid.dim();
        Lattice {
            lo: grid.half_widths.iter().map(|l| -l).collect(),
            h: (0..n).map(|j| grid.spacing(j)).collect(),
            m: grid.points.clone(),
        }
    }

    fn node(&self, j: usize, i: usize) -> f64 {
        self.lo[j] + (i + 1) as f64 * self.h[j]
    }

    /// The outermost `width` node layers at one end of an axis.
    fn slab(&self, axis: usize, high: bool, width: usize) -> Lattice {
        let mut s = self.clone();
        let width = width.min(self.m[axis]);
        if high {
            s.lo[axis] += (self.m[axis] - width) as f64 * self.h[axis];
        }
        s.m[axis] = width;
        s
    }

    fn unknowns(&self) -> usize {
        self.m.iter().product()
    }

    fn stride(&self, j: usize) -> usize {
        self.m[..j].iter().product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CountMethod {
    /// Sum of one-dimensional spectra for a = 0 and separable V.
    Separable,
    /// Band LDLᵀ of the real matrix, or of the realified complex one.
    BandInertia { complex: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DirectFlag {
    /// A boundary slab carries states below 2λ.
    TruncationUnsound { axis: usize, high: bool },
    /// The count came from H + εI after a pivot failure.
    Regularized { epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectCount {
    pub count: u64,
    pub method: CountMethod,
    pub flags: Vec<DirectFlag>,
}

/// Eigenvalues below λ of the discretized operator, with boundary-slab soundness flags.
pub fn count_nd_direct(spec: &SchrodingerSpec, lambda: f64, grid: &GridND) -> Result<DirectCount, SpectraError> {
    grid.check(spec, lambda)?;
    let op = Discretization::new(spec);
    let lat = Lattice::of(grid);
    op.check_storage(&lat)?;
    let (count, method, mut flags) = op.count(&lat, lambda)?;
    for axis in 0..grid.dim() {
        // slabs wide enough that their own Dirichlet energy stays below λ
        let len = (0.2 * grid.half_widths[axis]).max(std::f64::consts::PI / lambda.max(1e-12).sqrt());
        let width = ((len / lat.h[axis]).ceil() as usize).clamp(1, (grid.points[axis] / 2).max(1));
        for high in [false, true] {
            let slab = lat.slab(axis, high, width);
            let (c, _, _) = op.count(&slab, 2.0 * lambda)?;
            if c > 0 {
                flags.push(DirectFlag::TruncationUnsound { axis, high });
            }
        }
    }
    Ok(DirectCount { count, method, flags })
}

/// The discrete count without resolution rules or boundary checks.
pub(crate) fn count_unchecked(spec: &SchrodingerSpec, lambda: f64, grid: &GridND) -> Result<u64, SpectraError> {
    let op = Discretization::new(spec);
    let lat = Lattice::of(grid);
    op.check_storage(&lat)?;
    Ok(op.count(&lat, lambda)?.0)
}

/// Counts on one grid for a sweep of λ, in parallel when memory allows.
pub fn direct_curve(spec: &SchrodingerSpec, lambdas: &[f64], grid: &GridND) -> Result<CountingCurve, SpectraError> {
    let op = Discretization::new(spec);
    let lat = Lattice::of(grid);
    let storage = op.check_storage(&lat)?;
    let run = |l: &f64| count_nd_direct(spec, *l, grid);
    let results: Vec<Result<DirectCount, SpectraError>> = if storage * rayon::current_num_threads() <= BAND_STORAGE_LIMIT {
        lambdas.par_iter().map(run).collect()
    } else {
        lambdas.iter().map(run).collect()
    };
    let mut curve = CountingCurve::new()
        .with_meta("grid_points", format!("{:?}", grid.points))
        .with_meta("half_widths", format!("{:?}", grid.half_widths));
    let mut flagged = Vec::new();
    for (l, r) in lambdas.iter().zip(results) {
        let r = r?;
        let method = match r.method {
            CountMethod::Separable => "direct-separable",
            CountMethod::BandInertia { .. } => "direct-band",
        };
        if !r.flags.is_empty() {
            flagged.push(format!("{l}:{:?}", r.flags));
        }
        curve.push(*l, r.count as f64, 0.0, method);
    }
    if !flagged.is_empty() {
        curve = curve.with_meta("flags", flagged.join(";"));
    }
    Ok(curve)
}

struct Discretization {
    n: usize,
    v: F64Poly,
    a: Vec<F64Poly>,
    complex: bool,
    /// Per-axis potentials and a constant when V splits and a = 0.
    separable: Option<(Vec<F64Poly>, f64)>,
}

impl Discretization {
    fn new(spec: &SchrodingerSpec) -> Self {
        let n = spec.n();
        let complex = spec.a().iter().any(|p| !p.is_zero());
        let separable = (!complex).then(|| split_separable(spec.v(), n)).flatten();
        Discretization {
            n,
            v: spec.v().compile(),
            a: spec.a().iter().map(MultiPoly::compile).collect(),
            complex,
            separable,
        }
    }

    fn method(&self) -> CountMethod {
        if self.separable.is_some() {
            CountMethod::Separable
        } else {
            CountMethod::BandInertia { complex: self.complex }
        }
    }

    fn band_shape(&self, lat: &Lattice) -> (usize, usize) {
        let w = lat.stride(self.n - 1);
        if self.complex {
            (2 * lat.unknowns(), 2 * w + 1)
        } else {
            (lat.unknowns(), w)
        }
    }

    fn check_storage(&self, lat: &Lattice) -> Result<usize, SpectraError> {
        if self.separable.is_some() {
            return Ok(lat.m.iter().sum());
        }
        let (dim, w) = self.band_shape(lat);
        let storage = dim.saturating_mul(w + 1);
        if storage > BAND_STORAGE_LIMIT {
            return Err(SpectraError::GridTooLarge { unknowns: lat.unknowns(), bandwidth: w, limit: BAND_STORAGE_LIMIT });
        }
        Ok(storage)
    }

    fn count(&self, lat: &Lattice, lambda: f64) -> Result<(u64, CountMethod, Vec<DirectFlag>), SpectraError> {
        if let Some((axes, c)) = &self.separable {
            return Ok((separable_count(axes, *c, lat, lambda), CountMethod::Separable, Vec::new()));
        }
        let h = self.assemble(lat);
        let eps = 1e-12 * h.norm_inf();
        let halve = |neg: usize| -> Option<u64> {
            if self.complex {
                (neg % 2 == 0).then_some(neg as u64 / 2)
            } else {
                Some(neg as u64)
            }
        };
        if let Some(c) = h.inertia(lambda).ok().and_then(|i| halve(i.negative)) {
            return Ok((c, self.method(), Vec::new()));
        }
        match h.inertia(lambda - eps) {
            Ok(i) => match halve(i.negative) {
                Some(c) => Ok((c, self.method(), vec![DirectFlag::Regularized { epsilon: eps }])),
                None => Err(SpectraError::FactorizationBreakdown { index: i.negative }),
            },
            Err(e) => Err(SpectraError::FactorizationBreakdown { index: e.index }),
        }
    }

    /// Diagonal Σ2/hⱼ² + V, links −e^{iθ}/hⱼ² with θ = ∫ aⱼ along the link.
    fn assemble(&self, lat: &Lattice) -> BandMatrix {
        let n = self.n;
        let (dim, w) = self.band_shape(lat);
        let mut m = BandMatrix::zeros(dim, w);
        let kin: Vec<f64> = lat.h.iter().map(|h| 1.0 / (h * h)).collect();
        let diag0: f64 = kin.iter().map(|k| 2.0 * k).sum();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        for p in 0..lat.unknowns() {
            let mut r = p;
            for j in 0..n {
                idx[j] = r % lat.m[j];
                r /= lat.m[j];
                x[j] = lat.node(j, idx[j]);
            }
            let d = diag0 + self.v.eval(&x);
            if self.complex {
                m.add(2 * p, 2 * p, d);
                m.add(2 * p + 1, 2 * p + 1, d);
            } else {
                m.add(p, p, d);
            }
            for j in 0..n {
                if idx[j] + 1 >= lat.m[j] {
                    continue;
                }
                let q = p + lat.stride(j);
                if self.complex {
                    let theta = link_phase(&self.a[j], &x, j, lat.h[j]);
                    let (s, k) = (-theta.cos() * kin[j], -theta.sin() * kin[j]);
                    m.add(2 * q, 2 * p, s);
                    m.add(2 * q + 1, 2 * p + 1, s);
                    // H_pq = s + ik: the realified block is [[s, −k], [k, s]]
                    m.add(2 * q, 2 * p + 1, k);
                    m.add(2 * q + 1, 2 * p, -k);
                } else {
                    m.add(q, p, -kin[j]);
                }
            }
        }
        m
    }
}

fn link_phase(a: &F64Poly, x: &[f64], axis: usize, h: f64) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let mut z = [0.0; 4];
    z[..x.len()].copy_from_slice(x);
    let along = |t: f64| {
        let mut y = z;
        y[axis] += t;
        a.eval(&y[..x.len()])
    };
    kronrod15(&along, 0.0, h).0
}

/// V = c + Σⱼ Vⱼ(xⱼ), or None when some term mixes variables.
fn split_separable(v: &MultiPoly, n: usize) -> Option<(Vec<F64Poly>, f64)> {
    let mut axes = vec![Vec::new(); n];
    let mut c = 0.0;
    for (m, coef) in v.terms() {
        let vars: Vec<usize> = (0..n).filter(|&j| m.0[j] > 0).collect();
        match vars.as_slice() {
            [] => c += crate::exact::q_to_f64(coef),
            [j] => axes[*j].push((vec![m.0[*j]], coef.clone())),
            _ => return None,
        }
    }
    Some((axes.into_iter().map(|t| MultiPoly::from_terms(1, t).compile()).collect(), c))
}

fn separable_count(axes: &[F64Poly], c: f64, lat: &Lattice, lambda: f64) -> u64 {
    let n = axes.len();
    let tri: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .map(|j| {
            let k = 1.0 / (lat.h[j] * lat.h[j]);
            let diag = (0..lat.m[j]).map(|i| 2.0 * k + axes[j].eval(&[lat.node(j, i)])).collect();
            (diag, vec![-k; lat.m[j] - 1])
        })
        .collect();
    let lowest: Vec<f64> = tri.iter().map(|(d, o)| lowest_eigenvalue(d, o)).collect();
    let floor: f64 = lowest.iter().sum::<f64>() + c;
    if floor >= lambda {
        return 0;
    }
    let spectra: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let bound = lambda - floor + lowest[j];
            // strict count below the bound
            tridiagonal_eigenvalues(&tri[j].0, &tri[j].1, bound)
        })
        .collect();
    count_sums(&spectra, lambda - c)
}

fn lowest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let r = off.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 2.0;
    let hi = diag.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) + r + 1.0;
    let mut lo = diag.iter().fold(f64::INFINITY, |m, v| m.min(*v)) - r - 1.0;
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// #{tuples : Σ μ < bound} over sorted per-axis spectra.
fn count_sums(spectra: &[Vec<f64>], bound: f64) -> u64 {
    match spectra.split_first() {
        None => u64::from(bound > 0.0),
        Some((first, [])) => first.partition_point(|&m| m < bound) as u64,
        Some((first, rest)) => first.iter().take_while(|&&m| m < bound).map(|&m| count_sums(rest, bound - m)).sum(),
    }
}
