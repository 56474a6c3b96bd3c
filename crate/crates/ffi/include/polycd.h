#ifndef POLYCD_H
#define POLYCD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PolycdFeasibleSet {
  // Probability simplex; the radius argument is ignored.
  POLYCD_FEASIBLE_SET_SIMPLEX = 0,
  // ℓ1 ball of the given radius.
  POLYCD_FEASIBLE_SET_L1_BALL = 1,
} PolycdFeasibleSet;

typedef enum PolycdMethod {
  POLYCD_METHOD_POLYCD = 0,
  POLYCD_METHOD_POLYCDWA = 1,
  POLYCD_METHOD_FW = 2,
  POLYCD_METHOD_AFW = 3,
  POLYCD_METHOD_FISTA = 4,
  POLYCD_METHOD_TWOCD = 5,
} PolycdMethod;

typedef enum PolycdStatus {
  POLYCD_STATUS_OK = 0,
  POLYCD_STATUS_NULL_POINTER = 1,
  POLYCD_STATUS_INVALID_ARGUMENT = 2,
  POLYCD_STATUS_DIMENSION_MISMATCH = 3,
  POLYCD_STATUS_NOT_CONVERGED = 4,
  POLYCD_STATUS_CONSISTENCY = 5,
  POLYCD_STATUS_UNSUPPORTED = 6,
  POLYCD_STATUS_IO = 7,
  POLYCD_STATUS_PANIC = 8,
} PolycdStatus;

typedef enum PolycdStepRule {
  POLYCD_STEP_RULE_LINE_SEARCH = 0,
  POLYCD_STEP_RULE_GRADIENT = 1,
} PolycdStepRule;

// Opaque problem handle.
typedef struct PolycdProblem PolycdProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Least squares ‖A x − b‖² over the simplex or an ℓ1 ball.
//
// # Safety
// `a` holds `rows * cols` doubles, `b` holds `rows`, `out` is writable.
enum PolycdStatus polycd_problem_least_squares(const double *a,
                                               const double *b,
                                               size_t rows,
                                               size_t cols,
                                               enum PolycdFeasibleSet set,
                                               double radius,
                                               struct PolycdProblem **out);

// Logistic loss Σ log(1 + exp(−yᵢ aᵢᵀx)) over an ℓ1 ball; labels are ±1.
//
// # Safety
// `a` holds `rows * cols` doubles, `labels` holds `rows`, `out` is writable.
enum PolycdStatus polycd_problem_logistic(const double *a,
                                          const double *labels,
                                          size_t rows,
                                          size_t cols,
                                          double radius,
                                          struct PolycdProblem **out);

// Robust kernel density weights over the simplex, one sample per row.
//
// # Safety
// `points` holds `n * dim` doubles, `out` is writable.
enum PolycdStatus polycd_problem_kde(const double *points,
                                     size_t n,
                                     size_t dim,
                                     double bandwidth,
                                     double huber_mu,
                                     struct PolycdProblem **out);

// # Safety
// `problem` is null or a handle from a constructor, not yet freed.
void polycd_problem_free(struct PolycdProblem *problem);

// Number of decision variables, or 0 for a null handle.
//
// # Safety
// `problem` is null or a live handle.
size_t polycd_problem_dim(const struct PolycdProblem *problem);

// Runs one solver from the first vertex. `max_iter` bounds outer iterations
// (iterations for FW/AFW/FISTA, epochs for 2-CD) and `tol` is the relative
// improvement at which it stops. Writes the solution to `x_out` (length
// `polycd_problem_dim`) and optionally the final value and iteration count.
//
// # Safety
// `problem` is a live handle; `x_out` has room for `dim` doubles;
// `f_out` and `iterations_out` are null or writable.
enum PolycdStatus polycd_solve(const struct PolycdProblem *problem,
                               enum PolycdMethod method,
                               enum PolycdStepRule rule,
                               size_t max_iter,
                               double tol,
                               double *x_out,
                               double *f_out,
                               size_t *iterations_out);

// Objective value at `x`.
//
// # Safety
// `problem` is a live handle; `x` holds `dim` doubles; `f_out` is writable.
enum PolycdStatus polycd_value(const struct PolycdProblem *problem, const double *x, double *f_out);

// Euclidean projection of `y` onto the simplex or an ℓ1 ball of `radius`.
//
// # Safety
// `y` and `out` hold `dim` doubles and may alias.
enum PolycdStatus polycd_project(enum PolycdFeasibleSet set,
                                 double radius,
                                 const double *y,
                                 size_t dim,
                                 double *out);

// (f_hat − f_star) / max(|f_star|, 1)
double polycd_gap(double f_hat, double f_star);

// Library version as a static NUL-terminated string.
const char *polycd_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *polycd_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYCD_H */
