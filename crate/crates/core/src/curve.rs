//! Sampled (λ, value) curves shared by the counting and growth stages.

use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub value: f64,
    /// Standard error for stochastic points, discretization or quadrature estimate otherwise.
    pub error: f64,
    pub method: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CountingCurve {
    pub points: Vec<CurvePoint>,
    /// Free-form key/value metadata: spec hash, grid, seed.
    pub meta: Vec<(String, String)>,
}

impl CountingCurve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, lambda: f64, value: f64, error: f64, method: impl Into<String>) {
        self.points.push(CurvePoint { lambda, value, error, method: method.into() });
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether values never decrease along increasing λ.
    pub fn is_nondecreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].lambda < w[0].lambda || w[1].value >= w[0].value)
    }

    /// CSV with columns lambda, value, stderr, method.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str("lambda,value,stderr,method\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{},{}", p.lambda, p.value, p.error, p.method);
        }
        s
    }
}

/// `steps` log-spaced values from a to b inclusive.
pub fn log_space(a: f64, b: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..steps)
        .map(|i| (la + (lb - la) * i as f64 / (steps - 1) as f64).exp())
        .collect()
}
