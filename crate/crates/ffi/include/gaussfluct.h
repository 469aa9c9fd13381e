/* Generated by cbindgen. Do not edit. */

#ifndef GAUSSFLUCT_H
#define GAUSSFLUCT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by all functions.
 */
typedef enum gf_status {
  GF_STATUS_OK = 0,
  GF_STATUS_INVALID_ARGUMENT = 1,
  GF_STATUS_NULL_POINTER = 2,
  GF_STATUS_NONEXISTENT_FIELD = 3,
  GF_STATUS_QUADRATURE = 4,
  GF_STATUS_NON_FINITE_OBSERVABLE = 5,
  GF_STATUS_UNKNOWN_ID = 6,
  GF_STATUS_GRID_TOO_LARGE = 7,
  GF_STATUS_BUDGET_EXCEEDED = 8,
  GF_STATUS_ZERO_VARIANCE = 9,
  GF_STATUS_INSUFFICIENT_SPAN = 10,
  GF_STATUS_EXCLUDED_CASE = 11,
  GF_STATUS_CONFIG = 12,
  GF_STATUS_IO = 13,
  GF_STATUS_SERIALIZATION = 14,
  GF_STATUS_PANIC = 15,
} gf_status;

/**
 * A spectral measure.
 */
typedef struct gf_measure gf_measure;

/**
 * A frozen field realization.
 */
typedef struct gf_sampler gf_sampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of the calling thread into `buf`
 * (NUL-terminated, truncated to `len - 1` bytes). Returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gf_last_error_message(char *buf, size_t len);

/**
 * Bessel function of the first kind `J_nu(x)`, `nu >= 0`, `x >= 0`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum gf_status gf_bessel_j(double nu, double x, double *out);

/**
 * Probabilists' Hermite polynomial `H_q(x)`. Negative `q` is rejected.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum gf_status gf_hermite_h(int32_t q, double x, double *out);

/**
 * Parses a measure id such as `berry`, `bessel:2,1` or `powerlaw:0.4`.
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` a valid pointer.
 */
enum gf_status gf_measure_from_id(const char *id, struct gf_measure **out);

/**
 * Releases a measure. Null is ignored.
 *
 * # Safety
 * `measure` must come from [`gf_measure_from_id`] and not be used afterwards.
 */
void gf_measure_free(struct gf_measure *measure);

/**
 * Covariance `rho(r)` of the isotropic field with spectral measure `measure` in dimension `d`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum gf_status gf_covariance(const struct gf_measure *measure, size_t d, double r, double *out);

/**
 * Spectral condition for Hermite rank `rank`. Writes 1 to `finite` and the
 * integral to `value` when finite, otherwise 0 and NaN.
 *
 * # Safety
 * Pointers must be valid.
 */
enum gf_status gf_spectral_condition(const struct gf_measure *measure,
                                     size_t d,
                                     size_t rank,
                                     int32_t *finite,
                                     double *value);

/**
 * First-chaos variance over `t D` for a domain id such as `ball:2,1`.
 *
 * # Safety
 * Pointers must be valid and `domain` NUL-terminated.
 */
enum gf_status gf_rank_one_variance(const struct gf_measure *measure,
                                    const char *domain,
                                    double t,
                                    double *out);

/**
 * Draws a field realization with `waves` plane waves.
 *
 * # Safety
 * Pointers must be valid.
 */
enum gf_status gf_sampler_new(const struct gf_measure *measure,
                              size_t d,
                              size_t waves,
                              uint64_t seed,
                              struct gf_sampler **out);

/**
 * Evaluates the field at `n_points` points stored row-major in `points`
 * (`n_points * d` values). Writes `n_points` values to `out`.
 *
 * # Safety
 * `points` must hold `n_points * d` values and `out` room for `n_points`.
 */
enum gf_status gf_sampler_evaluate(const struct gf_sampler *sampler,
                                   const double *points,
                                   size_t n_points,
                                   double *out);

/**
 * Releases a sampler. Null is ignored.
 *
 * # Safety
 * `sampler` must come from [`gf_sampler_new`] and not be used afterwards.
 */
void gf_sampler_free(struct gf_sampler *sampler);

/**
 * Runs the experiment described by the config file at `config_path` and
 * writes its reports under `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum gf_status gf_run_config(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUSSFLUCT_H */
