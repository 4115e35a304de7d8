#ifndef WAVEDECAY_H
#define WAVEDECAY_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WdExample {
  WD_EXAMPLE_EXP_ORIGIN = 0,
  WD_EXAMPLE_POLY_ORIGIN = 1,
  WD_EXAMPLE_SUBLIN_ORIGIN = 2,
  WD_EXAMPLE_EXP_CUBIC = 3,
  WD_EXAMPLE_EXP_ABS = 4,
  WD_EXAMPLE_SUBLIN_INFINITY = 5,
  WD_EXAMPLE_SUPERLIN_INFINITY = 6,
} WdExample;

typedef enum WdInfinityKind {
  WD_INFINITY_KIND_LINEAR = 0,
  WD_INFINITY_KIND_POWER = 1,
} WdInfinityKind;

typedef enum WdOriginKind {
  WD_ORIGIN_KIND_LINEAR = 0,
  WD_ORIGIN_KIND_POWER = 1,
  WD_ORIGIN_KIND_EXP_CUBIC = 2,
  WD_ORIGIN_KIND_EXP_ABS = 3,
} WdOriginKind;

typedef enum WdStatus {
  WD_STATUS_OK = 0,
  WD_STATUS_NULL_POINTER = 1,
  WD_STATUS_INVALID_ARGUMENT = 2,
  WD_STATUS_NUMERIC = 3,
  WD_STATUS_CONFIG = 4,
  WD_STATUS_BUFFER_TOO_SMALL = 5,
  WD_STATUS_PANIC = 6,
} WdStatus;

typedef struct WdCurve WdCurve;

typedef struct WdFeedback WdFeedback;

typedef struct WdMonotone WdMonotone;

typedef struct WdTrace WdTrace;

// Feedback law description. `origin_exponent` is read only for the power
// origin branch, `r` only for the power branch at infinity.
typedef struct WdFeedbackParams {
  enum WdOriginKind origin;
  double origin_exponent;
  double m0;
  double big_m0;
  enum WdInfinityKind infinity;
  double r;
  double m;
  double big_m;
} WdFeedbackParams;

// Closed-form constants; a NaN field means "not supplied".
typedef struct WdClosedFormParams {
  double e0;
  double t0;
  double ctilde;
  double p;
  double theta;
  double r;
  double p0;
  double alpha;
} WdClosedFormParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the full message length.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
uintptr_t wd_last_error_message(char *buf, uintptr_t len);

// # Safety
// `params` must be null or point to a valid struct; `out` must be null or writable.
enum WdStatus wd_feedback_new(const struct WdFeedbackParams *params, struct WdFeedback **out);

// # Safety
// `fb` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_feedback_eval(const struct WdFeedback *fb, double s, double *out);

// # Safety
// `fb` must be null or a handle from [`wd_feedback_new`] not yet freed.
void wd_feedback_free(struct WdFeedback *fb);

// Builds the concave majorant `h₀` for a feedback law.
//
// # Safety
// `fb` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_h0_build(const struct WdFeedback *fb, struct WdMonotone **out);

// `x ↦ slope·x`.
//
// # Safety
// `out` must be null or writable.
enum WdStatus wd_monotone_linear(double slope, struct WdMonotone **out);

// `x ↦ coeff·x^exponent`.
//
// # Safety
// `out` must be null or writable.
enum WdStatus wd_monotone_power(double coeff, double exponent, struct WdMonotone **out);

// `h₁` for growth order `r` at infinity.
//
// # Safety
// `out` must be null or writable.
enum WdStatus wd_h1_build(double r, double p0, struct WdMonotone **out);

// `h = h₁ + h₀(·/meas_qt)`.
//
// # Safety
// `h0` and `h1` must be live handles or null; `out` must be null or writable.
enum WdStatus wd_h_build(const struct WdMonotone *h0,
                         const struct WdMonotone *h1,
                         double meas_qt,
                         struct WdMonotone **out);

// `q = ((K+1)·I + K·h)⁻¹`.
//
// # Safety
// `h` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_q_build(const struct WdMonotone *h, double k, struct WdMonotone **out);

// # Safety
// `f` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_monotone_eval(const struct WdMonotone *f, double x, double *out);

// # Safety
// `f` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_monotone_inverse(const struct WdMonotone *f, double y, double *out);

// # Safety
// `f` must be null or a handle from this library not yet freed.
void wd_monotone_free(struct WdMonotone *f);

// Integrates `S' + q(S) = 0`, `S(0) = e0`, on `[0, t_max]` with RK4.
//
// # Safety
// `q` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_envelope_solve(const struct WdMonotone *q,
                                double e0,
                                double t_max,
                                double dt,
                                struct WdCurve **out);

// # Safety
// `curve` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_curve_len(const struct WdCurve *curve, uintptr_t *out);

// Copies the `t` and `S` columns; either destination may be null.
//
// # Safety
// Non-null `t` and `s` must be valid for `len` doubles.
enum WdStatus wd_curve_copy(const struct WdCurve *curve, double *t, double *s, uintptr_t len);

// # Safety
// `curve` must be null or a handle from [`wd_envelope_solve`] not yet freed.
void wd_curve_free(struct WdCurve *curve);

// Closed-form decay bound of a standard family at time `t`.
//
// # Safety
// `params` must be null or valid; `out` must be null or writable.
enum WdStatus wd_closed_form(enum WdExample id,
                             const struct WdClosedFormParams *params,
                             double t,
                             double *out);

// Runs the wave simulation described by a TOML document (the `simulate`
// sections of an experiment config).
//
// # Safety
// `toml` must be null or a NUL-terminated string; `out` must be null or writable.
enum WdStatus wd_simulate_toml(const char *toml, struct WdTrace **out);

// # Safety
// `trace` must be a live handle or null; `out` must be null or writable.
enum WdStatus wd_trace_len(const struct WdTrace *trace, uintptr_t *out);

// Copies the `t`, `E`, `D` and observability columns; any destination may be null.
//
// # Safety
// Each non-null destination must be valid for `len` doubles.
enum WdStatus wd_trace_copy(const struct WdTrace *trace,
                            double *t,
                            double *energy,
                            double *damping,
                            double *obs,
                            uintptr_t len);

// # Safety
// `trace` must be null or a handle from [`wd_simulate_toml`] not yet freed.
void wd_trace_free(struct WdTrace *trace);

// Worst collar entry time `T₀` for a constant medium `ρ`, `K = I` on the box
// `[0, extent]^dim` (`dim` is 1 or 2), with reflecting walls.
//
// # Safety
// `extent` must be null or valid for `dim` doubles; `out` must be null or writable.
enum WdStatus wd_gcc_time(uintptr_t dim,
                          const double *extent,
                          double rho,
                          double collar_width,
                          uintptr_t n_pos,
                          uintptr_t n_dir,
                          double ds,
                          double t_max,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEDECAY_H */
