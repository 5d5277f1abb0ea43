//! Eigenvalue counting: closed forms, Sturm counts in one dimension, and direct
//! counts of finite-difference discretizations through matrix inertia.

mod band;
mod direct;
mod landau;
pub mod quad;
mod sturm;
mod weyl;

pub use band::{BandMatrix, Inertia, PivotFailure};
pub(crate) use direct::count_unchecked;
pub use direct::{count_nd_direct, direct_curve, CountMethod, DirectCount, DirectFlag, GridND, BAND_STORAGE_LIMIT, DEFAULT_CTRUNC};
pub use landau::{cdv_density, frequencies, harmonic_count, landau_levels, landau_sum};
pub use sturm::{count_1d, eigenvalues_1d, sturm_count, tridiagonal_eigenvalues, Grid1D};
pub use weyl::{weyl_cdv_integral, Region, WeylIntegral};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error("domain too small: potential {boundary:.4e} at the boundary, need at least {required:.4e}")]
    DomainTooSmall { boundary: f64, required: f64 },
    #[error("potential is not confining: {0}")]
    NotConfining(String),
    #[error("grid too coarse on axis {axis}: spacing {h:.4e} exceeds {limit:.4e}")]
    GridTooCoarse { axis: usize, h: f64, limit: f64 },
    #[error("grid too large: {unknowns} unknowns with bandwidth {bandwidth} exceed the storage limit {limit}")]
    GridTooLarge { unknowns: usize, bandwidth: usize, limit: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("truncation box is unbounded along some axis")]
    UnboundedTruncation,
    #[error("expected a potential in one variable")]
    NotOneDimensional,
    #[error("factorization breakdown at pivot {index} even after regularization")]
    FactorizationBreakdown { index: usize },
    #[error("integral does not converge: partial value {partial:.6e}, tail estimate {tail:.3e}")]
    NonConvergent { partial: f64, tail: f64 },
}

#[cfg(test)]
mod tests;
