#ifndef SYMPIDX_H
#define SYMPIDX_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Values 2 and 3 match the CLI exit codes.
 */
typedef enum SympidxStatus {
  SYMPIDX_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8, or a size that does not fit.
   */
  SYMPIDX_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The input was rejected by validation.
   */
  SYMPIDX_STATUS_INPUT = 2,
  /**
   * The numerics failed (refinement exhausted, ill-conditioned spectrum).
   */
  SYMPIDX_STATUS_NUMERICAL = 3,
  /**
   * A bug inside the library; the call was aborted.
   */
  SYMPIDX_STATUS_INTERNAL = 4,
} SympidxStatus;

typedef enum SympidxStrategy {
  SYMPIDX_STRATEGY_BLOCK_ASSEMBLY = 0,
  SYMPIDX_STRATEGY_FRAME_TRANSPORT = 1,
} SympidxStrategy;

/**
 * Coisotropic loop together with its holonomy.
 */
typedef struct SympidxLoop SympidxLoop;

/**
 * Certified symplectic matrix.
 */
typedef struct SympidxMatrix SympidxMatrix;

/**
 * Sampled symplectic path.
 */
typedef struct SympidxPath SympidxPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library from this thread.
 */
const char *sympidx_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sympidx_version(void);

/**
 * Validate a row-major `2n × 2n` matrix as symplectic within `tol`.
 *
 * # Safety
 * `entries` must point to `4 n²` doubles and `out` to writable storage.
 */
enum SympidxStatus sympidx_matrix_new(uintptr_t half_dim,
                                      const double *entries,
                                      double tol,
                                      struct SympidxMatrix **out);

/**
 * Parse a `matrix/1` JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum SympidxStatus sympidx_matrix_from_json(const char *json, struct SympidxMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void sympidx_matrix_free(struct SympidxMatrix *m);

/**
 * ρ-invariant of `m`, written as real and imaginary parts.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` writable.
 */
enum SympidxStatus sympidx_rho(const struct SympidxMatrix *m, double *re, double *im);

/**
 * Build a path from `count` samples: `times[count]` and `count` row-major
 * `2n × 2n` frames laid end to end.
 *
 * # Safety
 * `times` must hold `count` doubles, `frames` `count · 4n²`, `out` writable.
 */
enum SympidxStatus sympidx_path_new(uintptr_t half_dim,
                                    uintptr_t count,
                                    const double *times,
                                    const double *frames,
                                    double tol,
                                    struct SympidxPath **out);

/**
 * Parse a `symplectic-path/1` JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum SympidxStatus sympidx_path_from_json(const char *json, struct SympidxPath **out);

/**
 * # Safety
 * `p` must be null or a handle from this library not yet freed.
 */
void sympidx_path_free(struct SympidxPath *p);

/**
 * Mean index Δ of the path.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SympidxStatus sympidx_mean_index(const struct SympidxPath *p, double *out);

/**
 * Conley–Zehnder index of a path with nondegenerate endpoint.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SympidxStatus sympidx_cz_index(const struct SympidxPath *p, int64_t *out);

/**
 * Parse a `coisotropic-loop/1` document and its `holonomy/1` document.
 *
 * # Safety
 * Both strings must be NUL-terminated and `out` writable.
 */
enum SympidxStatus sympidx_loop_from_json(const char *loop_json,
                                          const char *holonomy_json,
                                          struct SympidxLoop **out);

/**
 * # Safety
 * `l` must be null or a handle from this library not yet freed.
 */
void sympidx_loop_free(struct SympidxLoop *l);

/**
 * Maslov index of the loop using the chosen lift.
 *
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum SympidxStatus sympidx_maslov_index(const struct SympidxLoop *l,
                                        enum SympidxStrategy strategy,
                                        double *out);

/**
 * Index of the orbit `orbit` (1-based) on the ellipsoid with weights
 * `lambdas[n]`, numerically and in closed form.
 *
 * # Safety
 * `lambdas` must hold `n` doubles; both outputs writable.
 */
enum SympidxStatus sympidx_ellipsoid(const double *lambdas,
                                     uintptr_t n,
                                     uintptr_t orbit,
                                     uintptr_t samples,
                                     double *mu_numeric,
                                     double *mu_closed_form);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMPIDX_H */
