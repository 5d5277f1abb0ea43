//! Adaptive Gauss–Kronrod quadrature, nested for boxes and stretched for infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_intervals: 4000 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// One K15 panel with its G7 error estimate; endpoint samples expose jumps the nodes straddle.
pub fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let (mut left, mut right) = (0.0, 0.0);
    for i in 0..7 {
        let (l, r) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        if i == 0 {
            (left, right) = (l, r);
        }
        k += WGK[i] * (l + r);
        if i % 2 == 1 {
            g += WG[i / 2] * (l + r);
        }
    }
    let gap = h.abs() * (1.0 - XGK[0]);
    let edge = gap * ((f(a) - left).abs() + (f(b) - right).abs());
    (k * h, ((k - g) * h).abs().max(edge))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive bisection on the panel with the largest error.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true };
    }
    let (v, e) = kronrod15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let (mut value, mut error, mut evals) = (v, e, 17);
    while error > tol.target(value) && heap.len() < tol.max_intervals {
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = kronrod15(&f, p.a, m);
        let (v2, e2) = kronrod15(&f, m, p.b);
        evals += 34;
        value += v1 + v2 - p.value;
        error += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
    }
    // resum to shed the drift of incremental updates
    value = heap.iter().map(|p| p.value).sum();
    error = heap.iter().map(|p| p.error).sum();
    QuadResult { value, error, evals, converged: error <= tol.target(value) }
}

/// ∫_ℝ f through x = t/(1 − t²).
pub fn adaptive_real_line(f: impl Fn(f64) -> f64, tol: Tolerance) -> QuadResult {
    adaptive(
        |t| {
            let s = 1.0 - t * t;
            if s <= 0.0 {
                return 0.0;
            }
            let w = (1.0 + t * t) / (s * s);
            let v = f(t / s);
            if v == 0.0 { 0.0 } else { v * w }
        },
        -1.0,
        1.0,
        tol,
    )
}

/// ∫_a^∞ f through x = a + t/(1 − t).
pub fn adaptive_half_line(f: impl Fn(f64) -> f64, a: f64, tol: Tolerance) -> QuadResult {
    adaptive(
        |t| {
            let s = 1.0 - t;
            if s <= 0.0 {
                return 0.0;
            }
            let v = f(a + t / s);
            if v == 0.0 { 0.0 } else { v / (s * s) }
        },
        0.0,
        1.0,
        tol,
    )
}

pub const MAX_DIM: usize = 4;

/// Iterated adaptive integration over a box, innermost axis last.
pub fn nested(f: &(impl Fn(&[f64]) -> f64 + Sync), lo: &[f64], hi: &[f64], tol: Tolerance) -> QuadResult {
    assert!(lo.len() == hi.len() && !lo.is_empty() && lo.len() <= MAX_DIM);
    let mut x = [0.0; MAX_DIM];
    nested_at(f, lo, hi, 0, &mut x, tol)
}

fn nested_at(
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    lo: &[f64],
    hi: &[f64],
    axis: usize,
    prefix: &mut [f64; MAX_DIM],
    tol: Tolerance,
) -> QuadResult {
    let n = lo.len();
    let p = *prefix;
    if axis + 1 == n {
        return adaptive(
            |t| {
                let mut x = p;
                x[axis] = t;
                f(&x[..n])
            },
            lo[axis],
            hi[axis],
            tol,
        );
    }
    let width: f64 = hi[axis + 1..].iter().zip(&lo[axis + 1..]).map(|(h, l)| h - l).product::<f64>().max(1.0);
    let inner_tol = Tolerance { abs: tol.abs / (10.0 * width), rel: tol.rel / 10.0, max_intervals: tol.max_intervals };
    let evals = std::sync::atomic::AtomicUsize::new(0);
    let inner_ok = std::sync::atomic::AtomicBool::new(true);
    let mut r = adaptive(
        |t| {
            let mut x = p;
            x[axis] = t;
            let r = nested_at(f, lo, hi, axis + 1, &mut x, inner_tol);
            evals.fetch_add(r.evals, std::sync::atomic::Ordering::Relaxed);
            if !r.converged {
                inner_ok.store(false, std::sync::atomic::Ordering::Relaxed);
            }
            r.value
        },
        lo[axis],
        hi[axis],
        tol,
    );
    r.evals = evals.into_inner();
    r.converged &= inner_ok.into_inner();
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let (v, e) = kronrod15(&|x: f64| x.powi(20), -1.0, 1.0);
        assert!((v - 2.0 / 21.0).abs() < 1e-14 && e > 0.0);
    }

    #[test]
    fn step_functions_converge() {
        let r = adaptive(|x| if x < 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, Tolerance::new(1e-9, 0.0));
        assert!(r.converged && (r.value - 0.3).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn infinite_ranges() {
        let tol = Tolerance::new(1e-11, 1e-11);
        let r = adaptive_real_line(|x| (-x * x).exp(), tol);
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        let r = adaptive_half_line(|x| (-x).exp(), 1.0, tol);
        assert!((r.value - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn nested_disk_area() {
        let r = nested(&|x: &[f64]| if x[0] * x[0] + x[1] * x[1] < 1.0 { 1.0 } else { 0.0 }, &[-1.0, -1.0], &[1.0, 1.0], Tolerance::new(1e-7, 1e-8));
        assert!((r.value - std::f64::consts::PI).abs() < 1e-6, "{r:?}");
    }
}
