#ifndef MAGORBIT_H
#define MAGORBIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MgStatus {
  MG_STATUS_OK = 0,
  MG_STATUS_NULL_POINTER = 1,
  MG_STATUS_INVALID_UTF8 = 2,
  MG_STATUS_INVALID_INPUT = 3,
  MG_STATUS_PARSE_ERROR = 4,
  MG_STATUS_UNSUPPORTED_STRUCTURE = 5,
  MG_STATUS_NON_CONVERGENT = 6,
  MG_STATUS_GRID_ERROR = 7,
  MG_STATUS_INDEX_OUT_OF_RANGE = 8,
  MG_STATUS_PANIC = 9,
  MG_STATUS_INTERNAL = 10,
} MgStatus;

// Sampled counting curve.
typedef struct MgCurve MgCurve;

// Schrödinger operator −Σ(∂ⱼ + iaⱼ)² + V.
typedef struct MgSpec MgSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next call.
const char *mg_last_error_message(void);

// Parses n, the magnetic potential components a (n strings, or `a_len` = 0 for none) and V.
//
// # Safety
// `a` must point to `a_len` NUL-terminated strings, `v` to one, `out` to writable storage.
enum MgStatus mg_spec_parse(size_t n,
                            const char *const *a,
                            size_t a_len,
                            const char *v,
                            struct MgSpec **out);

// Planar operator with magnetic field b(x1, x2) and potential V.
//
// # Safety
// `b` and `v` must be NUL-terminated strings, `out` writable.
enum MgStatus mg_spec_from_field_2d(const char *b, const char *v, struct MgSpec **out);

// # Safety
// `spec` must come from this library and not be used afterwards; null is ignored.
void mg_spec_free(struct MgSpec *spec);

// Whether the spectrum is discrete.
//
// # Safety
// `spec` must be a live handle, `out` writable.
enum MgStatus mg_spec_discreteness(const struct MgSpec *spec, bool *out);

// Dimension of the Lie algebra generated by the operator.
//
// # Safety
// `spec` must be a live handle, `out` writable.
enum MgStatus mg_algebra_dim(const struct MgSpec *spec, size_t *out);

// Phase-space integral ∫ N(λ) over all of ℝⁿ to relative tolerance `rel_tol`.
//
// # Safety
// `spec` must be a live handle, `out` writable.
enum MgStatus mg_weyl_cdv_integral(const struct MgSpec *spec,
                                   double lambda,
                                   double rel_tol,
                                   double *out);

// Direct counts at each λ on the box grid with `points[j]` interior points and half-width `half_widths[j]`.
//
// # Safety
// `lambdas` must hold `len` values, `points` and `half_widths` `dim` values each, `out` writable.
enum MgStatus mg_direct_curve(const struct MgSpec *spec,
                              const double *lambdas,
                              size_t len,
                              const size_t *points,
                              const double *half_widths,
                              size_t dim,
                              struct MgCurve **out);

// Number of points on a curve; 0 for null.
//
// # Safety
// `curve` must be a live handle or null.
size_t mg_curve_len(const struct MgCurve *curve);

// λ and value of point `i`.
//
// # Safety
// `curve` must be a live handle, `lambda` and `value` writable.
enum MgStatus mg_curve_point(const struct MgCurve *curve, size_t i, double *lambda, double *value);

// # Safety
// `curve` must come from this library and not be used afterwards; null is ignored.
void mg_curve_free(struct MgCurve *curve);

// Σⱼ (2j+1)^{−1−1/k}.
//
// # Safety
// `out` must be writable.
enum MgStatus mg_series_constant(uint32_t k, double tol, double *out);

// B(1/(2α), 3/2)/(πα).
//
// # Safety
// `out` must be writable.
enum MgStatus mg_kappa1(double alpha, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAGORBIT_H */
