#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  QT_STATUS_OK = 0,
  /**
   * Invalid argument (domain, profile, contour, or config).
   */
  QT_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A numeric tolerance or convergence contract failed.
   */
  QT_STATUS_NUMERIC_FAILURE = 2,
  /**
   * Null pointer or other usage error.
   */
  QT_STATUS_USAGE_ERROR = 3,
} QtStatus;

/**
 * Fluctuation phase of the slowest-rate perturbation.
 */
typedef enum {
  /**
   * `alpha > q^theta`: GUE Tracy-Widom fluctuations.
   */
  QT_PHASE_GUE = 0,
  /**
   * `alpha = q^theta`: rank-k BBP fluctuations.
   */
  QT_PHASE_CRITICAL = 1,
  /**
   * `alpha < q^theta`: largest eigenvalue of a k x k GUE.
   */
  QT_PHASE_GAUSSIAN = 2,
} QtPhase;

/**
 * Opaque handle to a tabulated limit CDF.
 */
typedef struct QtCdf QtCdf;

/**
 * Hydrodynamic constants for one `(q, theta, alpha)`.
 *
 * `g` and `sigma` are meaningful only when `has_shock_constants` is 1
 * (i.e. `alpha < 1`).
 */
typedef struct {
  double kappa;
  double f;
  double chi;
  double g;
  double sigma;
  int32_t has_shock_constants;
} QtHydroConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *qt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qt_version(void);

/**
 * Classify the fluctuation phase for a rate perturbation given as parallel
 * arrays of 1-based particle indices and rates (`n_slow` may be 0).
 *
 * # Safety
 * `out_phase` and `out_k` must be valid writable pointers; the slow arrays
 * must contain `n_slow` readable elements.
 */
QtStatus qt_classify_phase(double q,
                           double theta,
                           const uintptr_t *slow_indices,
                           const double *slow_rates,
                           uintptr_t n_slow,
                           QtPhase *out_phase,
                           uintptr_t *out_k);

/**
 * Hydrodynamic constants `kappa, f, chi` (always) and `g, sigma` (when
 * `alpha < 1`).
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
QtStatus qt_hydro_constants(double q, double theta, double alpha, QtHydroConstants *out);

/**
 * `b = c (log q)^2 / (2 chi^{2/3})`, the BBP shift of the critical branch.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
QtStatus qt_bbp_shift(double q, double theta, double c, double *out);

/**
 * Tabulate the GUE Tracy-Widom CDF. Building a table takes a few seconds.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
QtStatus qt_cdf_new_gue(QtCdf **out);

/**
 * Tabulate the BBP CDF with shifts `b[0..k]`.
 *
 * # Safety
 * `b` must point to `k` readable doubles; `out` must be writable.
 */
QtStatus qt_cdf_new_bbp(const double *b, uintptr_t k, QtCdf **out);

/**
 * Tabulate `G_k`, the law of the largest eigenvalue of a k x k GUE.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
QtStatus qt_cdf_new_gk(uintptr_t k, QtCdf **out);

/**
 * Evaluate a tabulated CDF.
 *
 * # Safety
 * `cdf` must be a live handle from `qt_cdf_new_*`; `out` must be writable.
 */
QtStatus qt_cdf_eval(const QtCdf *cdf, double x, double *out);

/**
 * Release a CDF handle (NULL is a no-op).
 *
 * # Safety
 * `cdf` must be NULL or a handle obtained from `qt_cdf_new_*`, released at
 * most once.
 */
void qt_cdf_free(QtCdf *cdf);

/**
 * Kolmogorov-Smirnov distance of samples against a tabulated CDF.
 *
 * # Safety
 * `samples` must point to `n` readable doubles; `out` must be writable.
 */
QtStatus qt_ks_statistic(const double *samples, uintptr_t n, const QtCdf *cdf, double *out);

/**
 * Draw `runs` rescaled fluctuation samples `xi` of the `n`-th particle at
 * the scaling-plan horizon, writing them to `out_xi[0..runs]`. Run `j`
 * uses RNG stream `j` of `master_seed`, so results do not depend on
 * `threads`.
 *
 * # Safety
 * `out_xi` must point to `runs` writable doubles; the slow arrays must
 * contain `n_slow` readable elements (or be NULL with `n_slow = 0`).
 */
QtStatus qt_monte_carlo_xi(double q,
                           double theta,
                           double c,
                           uint64_t n,
                           uint64_t runs,
                           const uintptr_t *slow_indices,
                           const double *slow_rates,
                           uintptr_t n_slow,
                           uint64_t master_seed,
                           uintptr_t threads,
                           double *out_xi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
