//! Conjectural asymptotic formulas, their constants, curve fits and comparisons.

mod compare;
mod conjecture;
mod constants;
pub mod fit;

pub use compare::{compare, Comparison, RatioPoint, Verdict, COMPARE_FIT, EXPONENT_TOLERANCE, RATIO_WINDOW};
pub use conjecture::{conjecture_rhs, conjecture_rhs_with, ConjectureOptions, ConjectureResult, Provenance, QuadratureInfo};
pub use constants::{
    kappa1_3d, kappa1_alpha, kappa_3d, kappa_inhomog, kappa_inhomog_integrand, odd_power_sum, series_constant,
    strong_constant, InhomogeneousKappa, Kappa3d, StrongConstant,
};
pub use fit::{fit, fit_with, line_fit, FitError, FitOptions, LineFit, PowerLogFit};

use crate::spectra::SpectraError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymError {
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("no convergence: value {value:.6e}, disagreement {error:.3e}")]
    NonConvergent { value: f64, error: f64 },
    #[error("tail bound fails: summability exponent {exponent} is not below -1")]
    TailBoundFailure { exponent: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
