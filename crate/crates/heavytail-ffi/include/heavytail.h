/* C interface for the heavytail library. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a C API call.
 */
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  HT_STATUS_NULL_ARGUMENT = 1,
  /**
   * Parameters violate a constructor constraint or a spec failed to parse.
   */
  HT_STATUS_INVALID_SPEC = 2,
  /**
   * A numeric argument fell outside the domain of the operation.
   */
  HT_STATUS_DOMAIN = 3,
  /**
   * Too little or unusable data for the requested fit or estimate.
   */
  HT_STATUS_INSUFFICIENT_DATA = 4,
  /**
   * The transform fails the monotonicity condition.
   */
  HT_STATUS_NOT_MONOTONE = 5,
  /**
   * A numeric routine failed to converge or overflowed.
   */
  HT_STATUS_NUMERICAL = 6,
} HtStatus;

/**
 * Opaque handle to a transformed distribution.
 */
typedef struct HtModel HtModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; never free it.
 */
const char *ht_last_error_message(void);

/**
 * Library version as a static NUL-terminated string; never free it.
 */
const char *ht_version(void);

/**
 * Build the four-parameter exponential-sides transform over a standard
 * Gaussian base: `f(x) = mu + sigma * x * (u^x/a + v^(-x)/a + 1)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable `*mut HtModel` storage.
 */
enum HtStatus ht_model_pgml(double mu,
                            double sigma,
                            double u,
                            double v,
                            double a,
                            struct HtModel **out);

/**
 * Build a model from its JSON spec: either a full `{"base", "transform"}`
 * object or a bare transform (Gaussian base assumed). All parameters are
 * re-validated.
 *
 * # Safety
 * `spec_json` must point to a NUL-terminated string; `out` must be a valid
 * pointer to writable `*mut HtModel` storage.
 */
enum HtStatus ht_model_from_json(const char *spec_json, struct HtModel **out);

/**
 * Fit the exponential-sides transform over a Gaussian base to a data array
 * by quantile regression, with `restarts` optimizer starts (0 picks the
 * default of 3) seeded by `seed`.
 *
 * # Safety
 * `data` must point to `len` readable doubles; `out` must be a valid
 * pointer to writable `*mut HtModel` storage.
 */
enum HtStatus ht_fit_pgml(const double *data,
                          uintptr_t len,
                          uintptr_t restarts,
                          uint64_t seed,
                          struct HtModel **out);

/**
 * Release a model handle. Passing null is a no-op.
 *
 * # Safety
 * `model` must be null or a pointer previously returned through an out
 * parameter of this library, not yet freed.
 */
void ht_model_free(struct HtModel *model);

/**
 * Quantile of the model at probability `alpha` in (0,1).
 *
 * # Safety
 * `model` must be a live handle from this library; `out` must point to a
 * writable double.
 */
enum HtStatus ht_model_quantile(const struct HtModel *model, double alpha, double *out);

/**
 * Cumulative probability of the model at `y`.
 *
 * # Safety
 * `model` must be a live handle from this library; `out` must point to a
 * writable double.
 */
enum HtStatus ht_model_cdf(const struct HtModel *model, double y, double *out);

/**
 * Density of the model at `y`.
 *
 * # Safety
 * `model` must be a live handle from this library; `out` must point to a
 * writable double.
 */
enum HtStatus ht_model_pdf(const struct HtModel *model, double y, double *out);

/**
 * Log-density of the model at `y` (may be -inf in regions of zero mass).
 *
 * # Safety
 * `model` must be a live handle from this library; `out` must point to a
 * writable double.
 */
enum HtStatus ht_model_log_pdf(const struct HtModel *model, double y, double *out);

/**
 * Draw `n` samples into the caller's buffer; identical (seed, n) pairs
 * reproduce identical draws.
 *
 * # Safety
 * `model` must be a live handle from this library; `out` must point to at
 * least `n` writable doubles.
 */
enum HtStatus ht_model_sample(const struct HtModel *model, uintptr_t n, uint64_t seed, double *out);

/**
 * Serialize the model's spec as JSON. The returned string must be released
 * with `ht_string_free`; returns null only on allocation failure.
 *
 * # Safety
 * `model` must be a live handle from this library.
 */
char *ht_model_to_json(const struct HtModel *model);

/**
 * Release a string returned by this library. Passing null is a no-op.
 *
 * # Safety
 * `s` must be null or a pointer returned by `ht_model_to_json`, not yet
 * freed.
 */
void ht_string_free(char *s);

/**
 * Hill tail-index estimate from the `k` largest of `len` observations.
 *
 * # Safety
 * `data` must point to `len` readable doubles; `out` must point to a
 * writable double.
 */
enum HtStatus ht_hill_estimator(const double *data, uintptr_t len, uintptr_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
