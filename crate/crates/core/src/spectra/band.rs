//! Symmetric band matrices and their inertia through LDLᵀ with 1×1/2×2 pivots.

/// Lower band of a symmetric matrix, stored by columns: entry (i, j), j ≤ i ≤ j + w.
#[derive(Clone, Debug, PartialEq)]
pub struct BandMatrix {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("pivot failure at index {index}")]
pub struct PivotFailure {
    pub index: usize,
}

/// Bunch–Kaufman growth constant (1 + √17)/8.
const ALPHA: f64 = 0.640_388_203_202_208_4;

impl BandMatrix {
    pub fn zeros(n: usize, w: usize) -> Self {
        BandMatrix { n, w, data: vec![0.0; n * (w + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.w + 1) + (i - j)
    }

    /// Entry (i, j) of the full symmetric matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.w {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds v at (i, j) and, by symmetry, at (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.w, "entry ({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for j in 0..self.n {
            for d in 0..=self.w.min(self.n - 1 - j) {
                let v = self.data[j * (self.w + 1) + d].abs();
                rows[j + d] += v;
                if d > 0 {
                    rows[j] += v;
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Inertia of A − σI.
    pub fn inertia(&self, sigma: f64) -> Result<Inertia, PivotFailure> {
        let mut a = self.clone();
        for j in 0..a.n {
            let k = a.idx(j, j);
            a.data[k] -= sigma;
        }
        a.factor_in_place()
    }

    fn factor_in_place(&mut self) -> Result<Inertia, PivotFailure> {
        let (n, w) = (self.n, self.w);
        let stride = w + 1;
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut out = Inertia::default();
        let mut k = 0;
        while k < n {
            let last = (k + w).min(n - 1);
            let a = self.data[k * stride];
            let colmax = self.data[k * stride + 1..k * stride + 1 + (last - k)]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            if !a.is_finite() {
                return Err(PivotFailure { index: k });
            }
            let partner = k + 1 < n && a.abs() < ALPHA * colmax && {
                let b = self.data[k * stride + 1];
                let c = self.data[(k + 1) * stride];
                let det = a * c - b * b;
                b.abs() >= ALPHA * colmax && det.abs() > tiny * b * b
            };
            if !partner {
                if a.abs() <= tiny {
                    return Err(PivotFailure { index: k });
                }
                if a < 0.0 {
                    out.negative += 1;
                } else {
                    out.positive += 1;
                }
                for j in k + 1..=last {
                    let ljk = self.data[k * stride + (j - k)];
                    if ljk == 0.0 {
                        continue;
                    }
                    let f = ljk / a;
                    let (head, tail) = self.data.split_at_mut(j * stride);
                    let colk = &head[k * stride + (j - k)..k * stride + (last - k) + 1];
                    let colj = &mut tail[..last - j + 1];
                    for (x, y) in colj.iter_mut().zip(colk) {
                        *x -= f * y;
                    }
                }
                k += 1;
            } else {
                let b = self.data[k * stride + 1];
                let c = self.data[(k + 1) * stride];
                let det = a * c - b * b;
                let tr = a + c;
                if det < 0.0 {
                    out.negative += 1;
                    out.positive += 1;
                } else if tr < 0.0 {
                    out.negative += 2;
                } else {
                    out.positive += 2;
                }
                let last2 = (k + 1 + w).min(n - 1);
                let col = |s: &Self, i: usize, c: usize| if i - c <= w { s.data[c * stride + (i - c)] } else { 0.0 };
                // rows k+2..=last2 of columns k and k+1
                let v0: Vec<f64> = (k + 2..=last2).map(|i| col(self, i, k)).collect();
                let v1: Vec<f64> = (k + 2..=last2).map(|i| col(self, i, k + 1)).collect();
                for j in k + 2..=last2 {
                    let (p0, p1) = (v0[j - k - 2], v1[j - k - 2]);
                    let x0 = (c * p0 - b * p1) / det;
                    let x1 = (a * p1 - b * p0) / det;
                    if x0 == 0.0 && x1 == 0.0 {
                        continue;
                    }
                    let base = j * stride;
                    for i in j..=last2 {
                        self.data[base + (i - j)] -= v0[i - k - 2] * x0 + v1[i - k - 2] * x1;
                    }
                }
                k += 2;
            }
        }
        Ok(out)
    }
}
