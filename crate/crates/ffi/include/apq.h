#ifndef APQ_H
#define APQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every exported function.
 */
typedef enum ApqStatus {
  APQ_STATUS_OK = 0,
  APQ_STATUS_NULL_POINTER = 1,
  APQ_STATUS_INVALID_PARAMS = 2,
  APQ_STATUS_NO_CONVERGENCE = 3,
  APQ_STATUS_OUTSIDE_DOMAIN = 4,
  APQ_STATUS_NEAR_BOUNDARY = 5,
  APQ_STATUS_INVALID_WEIGHT = 6,
  APQ_STATUS_NON_INTEGRABLE = 7,
  APQ_STATUS_UNSUPPORTED = 8,
  APQ_STATUS_INVALID_STRING = 9,
  APQ_STATUS_PANIC = 10,
} ApqStatus;

/**
 * Region of the moment domain.
 */
typedef enum ApqRegion {
  APQ_REGION_I = 1,
  APQ_REGION_II = 2,
  APQ_REGION_III = 3,
  APQ_REGION_IV = 4,
  APQ_REGION_GAMMA1 = 5,
  APQ_REGION_GAMMA_Q = 6,
  APQ_REGION_OUTSIDE = 7,
} ApqRegion;

/**
 * Opaque exponent pair, class constant and derived constants.
 */
typedef struct ApqModel ApqModel;

/**
 * Opaque piecewise weight on `[0,1]`.
 */
typedef struct ApqWeight ApqWeight;

/**
 * Constants derived from `(p1, p2, Q)`.
 */
typedef struct ApqConstants {
  double gamma_minus;
  double gamma_plus;
  double v_minus;
  double v_plus;
  double a;
  double nu;
  double a2;
  double b2;
  double c2;
} ApqConstants;

/**
 * A Bellman value with its region; `v` is NaN outside the curved regions.
 */
typedef struct ApqEval {
  double value;
  enum ApqRegion region;
  double v;
} ApqEval;

/**
 * Reverse Hölder result; `constant` is infinite when the integral diverges.
 */
typedef struct ApqRh {
  double constant;
  bool converged;
  double tail_power;
} ApqRh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *apq_last_error(void);

/**
 * Create a model for exponents `p1 > p2` and class constant `q > 1`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum ApqStatus apq_model_new(double p1, double p2, double q, struct ApqModel **out);

/**
 * Release a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`apq_model_new`] not yet freed.
 */
void apq_model_free(struct ApqModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ApqStatus apq_model_constants(const struct ApqModel *model, struct ApqConstants *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ApqStatus apq_classify(const struct ApqModel *model,
                            double x1,
                            double x2,
                            enum ApqRegion *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ApqStatus apq_eval(const struct ApqModel *model, double x1, double x2, struct ApqEval *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ApqStatus apq_eval_lambda(const struct ApqModel *model,
                               double x1,
                               double x2,
                               double lambda,
                               double *out);

/**
 * Supporting plane `B(x) = t[0] + t[1] x1 + t[2] x2`.
 *
 * # Safety
 * `model` must be a live handle and `out` must point to three writable doubles.
 */
enum ApqStatus apq_gradient(const struct ApqModel *model, double x1, double x2, double *out);

/**
 * Closed-form value for the pair `(1, -1)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ApqStatus apq_eval_a2(double x1, double x2, double q, double *out);

/**
 * Value for the logarithmic limit class, with `x2 = <log w>`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ApqStatus apq_eval_ainf(double x1, double x2, double q, struct ApqEval *out);

/**
 * Reverse Hölder constant from an upper-boundary point of the `(1, -1)` class.
 *
 * # Safety
 * `out` must be writable.
 */
enum ApqStatus apq_rh_constant(double q, double alpha, double x1, double x2, struct ApqRh *out);

/**
 * Build an extremal weight at `x`.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum ApqStatus apq_extremal_build(const struct ApqModel *model,
                                  double x1,
                                  double x2,
                                  struct ApqWeight **out);

/**
 * Parse a weight from its JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum ApqStatus apq_weight_from_json(const char *json, struct ApqWeight **out);

/**
 * Serialize a weight to JSON; free the result with [`apq_string_free`].
 *
 * # Safety
 * `weight` must be a live handle and `out` writable.
 */
enum ApqStatus apq_weight_to_json(const struct ApqWeight *weight, char **out);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from [`apq_weight_to_json`] not yet freed.
 */
void apq_string_free(char *s);

/**
 * Release a weight. Null is ignored.
 *
 * # Safety
 * `weight` must be null or a live handle not yet freed.
 */
void apq_weight_free(struct ApqWeight *weight);

/**
 * `<w^p>` over `[lo, hi]`.
 *
 * # Safety
 * `weight` must be a live handle and `out` writable.
 */
enum ApqStatus apq_weight_moment(const struct ApqWeight *weight,
                                 double p,
                                 double lo,
                                 double hi,
                                 double *out);

/**
 * Measure of `{w >= lambda}`.
 *
 * # Safety
 * `weight` must be a live handle and `out` writable.
 */
enum ApqStatus apq_weight_distribution(const struct ApqWeight *weight, double lambda, double *out);

/**
 * Class-norm estimate of a weight for the model's exponents.
 *
 * # Safety
 * `weight` and `model` must be live handles and `out` writable.
 */
enum ApqStatus apq_weight_apq_norm(const struct ApqWeight *weight,
                                   const struct ApqModel *model,
                                   uintptr_t resolution,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APQ_H */
