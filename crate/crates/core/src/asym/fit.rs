//! Least-squares fits of C·λᵃ·(log λ)ᵇ with b ∈ {0, 1}.

use crate::curve::CountingCurve;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("insufficient span: {points} usable points over {decades:.2} decades (need {min_points} over {min_decades})")]
    InsufficientSpan { points: usize, decades: f64, min_points: usize, min_decades: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitOptions {
    pub min_points: usize,
    pub min_span_decades: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { min_points: 6, min_span_decades: 1.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerLogFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub a: f64,
    pub b: u8,
    /// Covariance of (log C, a).
    pub covariance: [[f64; 2]; 2],
    pub rss: f64,
    pub bic: f64,
}

impl PowerLogFit {
    pub fn eval(&self, lambda: f64) -> f64 {
        self.c * lambda.powf(self.a) * lambda.ln().powi(self.b as i32)
    }

    pub fn a_stderr(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Ordinary least squares y ≈ intercept + slope·x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub residual: f64,
    pub dof: usize,
}

impl LineFit {
    /// Two-sided confidence half-width for the slope.
    pub fn slope_halfwidth(&self, level: f64) -> f64 {
        self.slope_se * t_quantile(level, self.dof)
    }

    pub fn intercept_halfwidth(&self, level: f64) -> f64 {
        self.intercept_se * t_quantile(level, self.dof)
    }
}

fn t_quantile(level: f64, dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof.max(1) as f64)
        .map(|t| t.inverse_cdf(0.5 + level / 2.0))
        .unwrap_or(f64::INFINITY)
}

pub fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = x.len().saturating_sub(2);
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if dof > 0 { rss / dof as f64 } else { f64::INFINITY };
    LineFit {
        slope,
        intercept,
        slope_se: (s2 / sxx).sqrt(),
        intercept_se: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
        residual: rss,
        dof,
    }
}

fn fit_fixed_b(ls: &[f64], lls: &[f64], lg: &[f64], b: u8) -> PowerLogFit {
    let n = ls.len();
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { ls[i] });
    let y = DVector::from_fn(n, |i, _| lg[i] - b as f64 * lls[i]);
    let xtx = x.transpose() * &x;
    let inv = xtx.try_inverse().unwrap_or_else(|| DMatrix::from_element(2, 2, f64::NAN));
    let beta = &inv * x.transpose() * &y;
    let resid = &y - &x * &beta;
    let rss = resid.norm_squared();
    let s2 = if n > 2 { rss / (n - 2) as f64 } else { 0.0 };
    let cov = &inv * s2;
    let bic = n as f64 * (rss / n as f64).max(1e-300).ln() + 2.0 * (n as f64).ln();
    PowerLogFit {
        c: beta[0].exp(),
        a: beta[1],
        b,
        covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        rss,
        bic,
    }
}

/// Fit with default span requirements.
pub fn fit(curve: &CountingCurve, force_b: Option<u8>) -> Result<PowerLogFit, FitError> {
    fit_with(curve, force_b, FitOptions::default())
}

/// Points with λ > e and positive values enter the fit; b is chosen by BIC unless forced.
pub fn fit_with(curve: &CountingCurve, force_b: Option<u8>, opts: FitOptions) -> Result<PowerLogFit, FitError> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.lambda > std::f64::consts::E && p.value > 0.0 && p.value.is_finite())
        .map(|p| (p.lambda, p.value))
        .collect();
    let decades = match (
        pts.iter().map(|p| p.0).reduce(f64::min),
        pts.iter().map(|p| p.0).reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) => (hi / lo).log10(),
        _ => 0.0,
    };
    if pts.len() < opts.min_points.max(3) || decades < opts.min_span_decades {
        return Err(FitError::InsufficientSpan {
            points: pts.len(),
            decades,
            min_points: opts.min_points,
            min_decades: opts.min_span_decades,
        });
    }
    let ls: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let lls: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let lg: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    Ok(match force_b {
        Some(b) => fit_fixed_b(&ls, &lls, &lg, b.min(1)),
        None => {
            let f0 = fit_fixed_b(&ls, &lls, &lg, 0);
            let f1 = fit_fixed_b(&ls, &lls, &lg, 1);
            if f1.bic < f0.bic {
                f1
            } else {
                f0
            }
        }
    })
}
