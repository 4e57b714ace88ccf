#ifndef BRWRE_H
#define BRWRE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BrwreMethod {
  BRWRE_METHOD_POINT = 0,
  BRWRE_METHOD_SLOPE = 1,
} BrwreMethod;

/**
 * Status codes. `BRWRE_STATUS_OK` is zero.
 */
typedef enum BrwreStatus {
  BRWRE_STATUS_OK = 0,
  BRWRE_STATUS_NULL_POINTER = 1,
  BRWRE_STATUS_MALFORMED_LAW = 2,
  BRWRE_STATUS_DOMAIN = 3,
  /**
   * The law has a component with mean zero.
   */
  BRWRE_STATUS_HYP1 = 4,
  /**
   * A zero mean was met in the polymer recursion.
   */
  BRWRE_STATUS_ZERO_MEAN = 5,
  BRWRE_STATUS_TOO_LARGE = 6,
  BRWRE_STATUS_COUPLING_VIOLATION = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  BRWRE_STATUS_INTERNAL = 8,
} BrwreStatus;

/**
 * Opaque quenched environment.
 */
typedef struct BrwreEnv BrwreEnv;

/**
 * Opaque environment law.
 */
typedef struct BrwreLaw BrwreLaw;

/**
 * Result of [`brwre_law_validate`].
 */
typedef struct BrwreValidation {
  bool hyp1_ok;
  bool hyp2_ok;
  /**
   * Some component is the Dirac mass at 0.
   */
  bool has_dirac_zero;
} BrwreValidation;

/**
 * A Monte Carlo estimate. The Wilson bounds are NaN for real-valued estimates.
 */
typedef struct BrwreEstimate {
  double mean;
  double std_error;
  size_t replicas;
  double wilson_low;
  double wilson_high;
} BrwreEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *brwre_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *brwre_version(void);

/**
 * Builds a mixture of `n_components` offspring laws. Component `i` has
 * weight `weights[i]` and pmf `pmfs[offsets[i] .. offsets[i] + lengths[i]]`
 * where offsets are the running sums of `lengths`.
 *
 * # Safety
 * `weights` and `lengths` must hold `n_components` values and `pmfs` the sum
 * of `lengths`. `out` must be a valid pointer.
 */
enum BrwreStatus brwre_law_new(const double *weights,
                               const double *pmfs,
                               const size_t *lengths,
                               size_t n_components,
                               struct BrwreLaw **out_law);

/**
 * # Safety
 * `law` must come from this library and not be used afterwards. NULL is ignored.
 */
void brwre_law_free(struct BrwreLaw *law);

/**
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_law_validate(const struct BrwreLaw *law, struct BrwreValidation *out_report);

/**
 * Mean offspring number averaged over the environment law.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_law_annealed_mean(const struct BrwreLaw *law, double *out_mean);

/**
 * Thins every component with weight `1 - rho` on zero children.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_law_perturb(const struct BrwreLaw *law,
                                   double rho,
                                   struct BrwreLaw **out_law);

/**
 * A quenched environment in dimension `dim` drawn from `law` with `seed`.
 * The law is copied.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_env_new(const struct BrwreLaw *law,
                               uint64_t seed,
                               size_t dim,
                               struct BrwreEnv **out_env);

/**
 * # Safety
 * `env` must come from this library and not be used afterwards. NULL is ignored.
 */
void brwre_env_free(struct BrwreEnv *env);

/**
 * Mean offspring number `m_{t,x}` at time `t` and the site with `dim` coordinates.
 *
 * # Safety
 * `coords` must hold the environment's dimension many values.
 */
enum BrwreStatus brwre_env_mean(const struct BrwreEnv *env,
                                uint32_t t,
                                const int32_t *coords,
                                double *out_mean);

/**
 * Natural log of the normalised polymer partition function at time `t`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_partition_function(const struct BrwreEnv *env,
                                          uint32_t t,
                                          double *out_log_z);

/**
 * Free-energy estimate over `replicas` environments with seeds `seed + i`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_free_energy(const struct BrwreLaw *law,
                                   size_t dim,
                                   uint32_t t,
                                   size_t replicas,
                                   uint64_t seed,
                                   enum BrwreMethod method,
                                   struct BrwreEstimate *out_estimate);

/**
 * Annealed survival proxy from `n_sites` occupied sites. Site `i` has
 * coordinates `coords[i*dim .. (i+1)*dim]` and `counts[i]` particles.
 *
 * # Safety
 * `coords` must hold `n_sites * dim` values and `counts` `n_sites` values.
 */
enum BrwreStatus brwre_survival_probability(const struct BrwreLaw *law,
                                            size_t dim,
                                            const int32_t *coords,
                                            const uint64_t *counts,
                                            size_t n_sites,
                                            uint32_t horizon,
                                            uint64_t cap,
                                            size_t replicas,
                                            uint64_t seed,
                                            struct BrwreEstimate *out_estimate);

/**
 * Probability of the block event with parameters `n`, `l`, `t`.
 * `site_cap == 0` disables per-site clipping.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BrwreStatus brwre_block_event_probability(const struct BrwreLaw *law,
                                               size_t dim,
                                               uint32_t n,
                                               uint32_t l,
                                               uint32_t t,
                                               uint64_t site_cap,
                                               size_t replicas,
                                               uint64_t seed,
                                               struct BrwreEstimate *out_estimate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRWRE_H */
