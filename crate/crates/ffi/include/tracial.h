#ifndef TRACIAL_H
#define TRACIAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TracialStatus {
  TRACIAL_STATUS_OK = 0,
  TRACIAL_STATUS_NULL_POINTER = 1,
  TRACIAL_STATUS_INVALID_INPUT = 2,
  TRACIAL_STATUS_TOO_LARGE = 3,
  /**
   * A result was written but the optimizer did not meet its tolerance.
   */
  TRACIAL_STATUS_UNCONVERGED = 4,
  TRACIAL_STATUS_PANIC = 5,
} TracialStatus;

/**
 * A weighted direct sum of matrix blocks.
 */
typedef struct TracialAlgebra TracialAlgebra;

/**
 * A tuple of elements of one algebra.
 */
typedef struct TracialTuple TracialTuple;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tracial_version(void);

/**
 * Message of the last failed call on this thread, empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *tracial_last_error(void);

/**
 * Builds `⊕ M_{dims[j]}` with trace weights `num[j]/den[j]`, which must sum
 * to one.
 *
 * # Safety
 * `dims`, `num` and `den` must each point to `blocks` readable values and
 * `out` must be writable.
 */
enum TracialStatus tracial_algebra_new(size_t blocks,
                                       const size_t *dims,
                                       const int64_t *num,
                                       const int64_t *den,
                                       struct TracialAlgebra **out);

/**
 * Complex dimension `Σ n_j²`, or 0 for a null handle.
 *
 * # Safety
 * `alg` must be null or a live handle.
 */
size_t tracial_algebra_dim(const struct TracialAlgebra *alg);

/**
 * # Safety
 * `alg` must be null or a handle from [`tracial_algebra_new`] not yet freed.
 */
void tracial_algebra_free(struct TracialAlgebra *alg);

/**
 * Builds a tuple of `arity` elements from `len` doubles, which must equal
 * `2 · arity · dim(alg)`.
 *
 * # Safety
 * `alg` must be a live handle, `data` must point to `len` readable doubles
 * and `out` must be writable.
 */
enum TracialStatus tracial_tuple_new(const struct TracialAlgebra *alg,
                                     size_t arity,
                                     const double *data,
                                     size_t len,
                                     struct TracialTuple **out);

/**
 * `‖x‖ = (Σ_k τ(x_k* x_k))^{1/2}`, or NaN for a null handle.
 *
 * # Safety
 * `x` must be null or a live handle.
 */
double tracial_tuple_norm(const struct TracialTuple *x);

/**
 * # Safety
 * `x` must be null or a handle from [`tracial_tuple_new`] not yet freed.
 */
void tracial_tuple_free(struct TracialTuple *x);

/**
 * Wasserstein distance between two tuples of the same factor. Writes the
 * distance and returns `Unconverged` when the best restart missed `tol`.
 *
 * # Safety
 * `x` and `y` must be live handles and `d` must be writable.
 */
enum TracialStatus tracial_wasserstein(const struct TracialTuple *x,
                                       const struct TracialTuple *y,
                                       size_t restarts,
                                       uint64_t seed,
                                       double tol,
                                       double *d);

/**
 * Dimension of the definable closure of an inclusion given as JSON
 * (`{"sub": ..., "amb": ..., "mult": ...}`, as read by the CLI).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `dim` must be writable.
 */
enum TracialStatus tracial_dcl_dim(const char *json, size_t *dim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACIAL_H */
