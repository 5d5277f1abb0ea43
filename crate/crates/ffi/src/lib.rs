//! C ABI over magorbit: opaque handles, status codes and a thread-local error message.
//!
//! Every fallible call returns an [`MgStatus`] and writes its result through an out pointer.
//! Handles are created by `mg_*_new`/`mg_*_parse` style calls and released by the matching `*_free`.

use magorbit::asym::{kappa1_alpha, series_constant, AsymError};
use magorbit::curve::CountingCurve;
use magorbit::liealg::{discreteness, LieAlgebra, LieError, SchrodingerSpec};
use magorbit::poly::{parse, MultiPoly, PolyError};
use magorbit::spectra::{direct_curve, weyl_cdv_integral, GridND, Region, SpectraError};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    ParseError = 4,
    UnsupportedStructure = 5,
    NonConvergent = 6,
    GridError = 7,
    IndexOutOfRange = 8,
    Panic = 9,
    Internal = 10,
}

/// Schrödinger operator −Σ(∂ⱼ + iaⱼ)² + V.
pub struct MgSpec(SchrodingerSpec);

/// Sampled counting curve.
pub struct MgCurve(CountingCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(MgStatus, String);

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        Failure(MgStatus::ParseError, e.to_string())
    }
}

impl From<LieError> for Failure {
    fn from(e: LieError) -> Self {
        let status = match e {
            LieError::Poly(_) => MgStatus::ParseError,
            LieError::DimensionMismatch { .. } | LieError::NotClosed => MgStatus::InvalidInput,
            _ => MgStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

impl From<SpectraError> for Failure {
    fn from(e: SpectraError) -> Self {
        let status = match e {
            SpectraError::NonConvergent { .. } => MgStatus::NonConvergent,
            SpectraError::NotConfining(_) | SpectraError::UnboundedTruncation => MgStatus::UnsupportedStructure,
            _ => MgStatus::GridError,
        };
        Failure(status, e.to_string())
    }
}

impl From<AsymError> for Failure {
    fn from(e: AsymError) -> Self {
        let status = match e {
            AsymError::InvalidInput(_) => MgStatus::InvalidInput,
            AsymError::UnsupportedStructure(_) => MgStatus::UnsupportedStructure,
            _ => MgStatus::NonConvergent,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records its failure message, and turns panics into [`MgStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MgStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside magorbit".into());
            MgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(MgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(MgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn spec_ref<'a>(spec: *const MgSpec) -> Result<&'a SchrodingerSpec, Failure> {
    spec.as_ref().map(|s| &s.0).ok_or_else(|| null("spec"))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn mg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses n, the magnetic potential components a (n strings, or `a_len` = 0 for none) and V.
///
/// # Safety
/// `a` must point to `a_len` NUL-terminated strings, `v` to one, `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn mg_spec_parse(
    n: usize,
    a: *const *const c_char,
    a_len: usize,
    v: *const c_char,
    out: *mut *mut MgSpec,
) -> MgStatus {
    guard(|| {
        let a: Vec<&str> = slice(a, a_len, "a")?.iter().map(|&p| text(p, "a component")).collect::<Result<_, _>>()?;
        let spec = SchrodingerSpec::parse(n, &a, text(v, "v")?)?;
        put(out, Box::into_raw(Box::new(MgSpec(spec))))
    })
}

/// Planar operator with magnetic field b(x1, x2) and potential V.
///
/// # Safety
/// `b` and `v` must be NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_spec_from_field_2d(b: *const c_char, v: *const c_char, out: *mut *mut MgSpec) -> MgStatus {
    guard(|| {
        let b = parse(text(b, "b")?, 2)?;
        let v = match text(v, "v")?.trim() {
            "" => MultiPoly::zero(2),
            s => parse(s, 2)?,
        };
        put(out, Box::into_raw(Box::new(MgSpec(SchrodingerSpec::from_field_2d(b, v)?))))
    })
}

/// # Safety
/// `spec` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mg_spec_free(spec: *mut MgSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Whether the spectrum is discrete.
///
/// # Safety
/// `spec` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_spec_discreteness(spec: *const MgSpec, out: *mut bool) -> MgStatus {
    guard(|| put(out, discreteness(spec_ref(spec)?)))
}

/// Dimension of the Lie algebra generated by the operator.
///
/// # Safety
/// `spec` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_algebra_dim(spec: *const MgSpec, out: *mut usize) -> MgStatus {
    guard(|| {
        let g = LieAlgebra::build(spec_ref(spec)?);
        g.check_axioms()?;
        put(out, g.dim())
    })
}

/// Phase-space integral ∫ N(λ) over all of ℝⁿ to relative tolerance `rel_tol`.
///
/// # Safety
/// `spec` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_weyl_cdv_integral(spec: *const MgSpec, lambda: f64, rel_tol: f64, out: *mut f64) -> MgStatus {
    guard(|| {
        let w = weyl_cdv_integral(spec_ref(spec)?, lambda, &Region::AllSpace, rel_tol)?;
        put(out, w.value)
    })
}

/// Direct counts at each λ on the box grid with `points[j]` interior points and half-width `half_widths[j]`.
///
/// # Safety
/// `lambdas` must hold `len` values, `points` and `half_widths` `dim` values each, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_direct_curve(
    spec: *const MgSpec,
    lambdas: *const f64,
    len: usize,
    points: *const usize,
    half_widths: *const f64,
    dim: usize,
    out: *mut *mut MgCurve,
) -> MgStatus {
    guard(|| {
        let s = spec_ref(spec)?;
        let grid = GridND::new(slice(half_widths, dim, "half_widths")?.to_vec(), slice(points, dim, "points")?.to_vec())?;
        let curve = direct_curve(s, slice(lambdas, len, "lambdas")?, &grid)?;
        put(out, Box::into_raw(Box::new(MgCurve(curve))))
    })
}

/// Number of points on a curve; 0 for null.
///
/// # Safety
/// `curve` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_curve_len(curve: *const MgCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// λ and value of point `i`.
///
/// # Safety
/// `curve` must be a live handle, `lambda` and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn mg_curve_point(curve: *const MgCurve, i: usize, lambda: *mut f64, value: *mut f64) -> MgStatus {
    guard(|| {
        let c = &curve.as_ref().ok_or_else(|| null("curve"))?.0;
        let p = c
            .points
            .get(i)
            .ok_or_else(|| Failure(MgStatus::IndexOutOfRange, format!("point {i} of {}", c.len())))?;
        put(lambda, p.lambda)?;
        put(value, p.value)
    })
}

/// # Safety
/// `curve` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mg_curve_free(curve: *mut MgCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Σⱼ (2j+1)^{−1−1/k}.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_series_constant(k: u32, tol: f64, out: *mut f64) -> MgStatus {
    guard(|| {
        if k == 0 || !(tol > 0.0) {
            return Err(Failure(MgStatus::InvalidInput, "need k ≥ 1 and tol > 0".into()));
        }
        put(out, series_constant(k, tol))
    })
}

/// B(1/(2α), 3/2)/(πα).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_kappa1(alpha: f64, out: *mut f64) -> MgStatus {
    guard(|| {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(AsymError::InvalidInput(format!("alpha = {alpha}")).into());
        }
        put(out, kappa1_alpha(alpha))
    })
}
