//! Direct counts against the predicted leading term.

use super::conjecture::ConjectureResult;
use super::fit::{fit_with, FitOptions, PowerLogFit};
use crate::curve::CountingCurve;
use serde::Serialize;

/// Largest fitted-exponent difference for a consistent verdict.
pub const EXPONENT_TOLERANCE: f64 = 0.1;
/// Ratio window at the largest λ for a consistent verdict.
pub const RATIO_WINDOW: (f64, f64) = (0.6, 1.6);
/// Beyond these the pair is declared inconsistent.
pub const EXPONENT_REJECT: f64 = 0.3;
pub const RATIO_REJECT: (f64, f64) = (0.3, 3.0);

/// Fit requirements for short direct sweeps.
pub const COMPARE_FIT: FitOptions = FitOptions { min_points: 4, min_span_decades: 0.3 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub lambda: f64,
    pub direct: f64,
    pub predicted: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub points: Vec<RatioPoint>,
    pub direct_fit: Option<PowerLogFit>,
    pub predicted_fit: Option<PowerLogFit>,
    pub exponent_difference: Option<f64>,
    /// |log ratio| at the largest λ minus the same at the smallest.
    pub trend: f64,
    pub improving: bool,
    pub verdict: Verdict,
}

impl Comparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn last_ratio(&self) -> Option<f64> {
        self.points.last().map(|p| p.ratio)
    }
}

/// Log-log interpolation of a positive curve; None outside its λ range.
fn interpolate(curve: &CountingCurve, lambda: f64) -> Option<f64> {
    let pts = &curve.points;
    let i = pts.iter().position(|p| p.lambda >= lambda * (1.0 - 1e-12))?;
    let p1 = &pts[i];
    if (p1.lambda - lambda).abs() <= 1e-12 * lambda {
        return Some(p1.value);
    }
    let p0 = pts.get(i.checked_sub(1)?)?;
    if p0.value <= 0.0 || p1.value <= 0.0 {
        return None;
    }
    let t = (lambda.ln() - p0.lambda.ln()) / (p1.lambda.ln() - p0.lambda.ln());
    Some((p0.value.ln() + t * (p1.value.ln() - p0.value.ln())).exp())
}

pub fn compare(direct: &CountingCurve, predicted: &ConjectureResult) -> Comparison {
    let points: Vec<RatioPoint> = direct
        .points
        .iter()
        .filter_map(|p| {
            let pred = interpolate(&predicted.rhs_curve, p.lambda)?;
            (pred > 0.0 && p.value > 0.0).then(|| RatioPoint {
                lambda: p.lambda,
                direct: p.value,
                predicted: pred,
                ratio: p.value / pred,
            })
        })
        .collect();
    let b = Some(predicted.beta.min(1) as u8);
    let mut on_overlap = CountingCurve::new();
    let mut pred_overlap = CountingCurve::new();
    for p in &points {
        on_overlap.push(p.lambda, p.direct, 0.0, "direct");
        pred_overlap.push(p.lambda, p.predicted, 0.0, "predicted");
    }
    let direct_fit = fit_with(&on_overlap, b, COMPARE_FIT).ok();
    let predicted_fit = fit_with(&pred_overlap, b, COMPARE_FIT).ok();
    let exponent_difference = match (&direct_fit, &predicted_fit) {
        (Some(d), Some(p)) => Some((d.a - p.a).abs()),
        _ => None,
    };
    let (trend, improving) = match (points.first(), points.last()) {
        (Some(f), Some(l)) if points.len() >= 2 => {
            let t = l.ratio.ln().abs() - f.ratio.ln().abs();
            (t, t <= 0.01)
        }
        _ => (0.0, false),
    };
    let last = points.last().map(|p| p.ratio);
    let verdict = match (exponent_difference, last) {
        (Some(d), Some(r)) if d > EXPONENT_REJECT || r < RATIO_REJECT.0 || r > RATIO_REJECT.1 => Verdict::Inconsistent,
        (Some(d), Some(r)) if d <= EXPONENT_TOLERANCE && (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&r) && improving => {
            Verdict::Consistent
        }
        _ => Verdict::Inconclusive,
    };
    Comparison { points, direct_fit, predicted_fit, exponent_difference, trend, improving, verdict }
}
