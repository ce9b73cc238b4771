/* C interface to the partint Hamiltonian toolkit.
* Generated by cbindgen; do not edit by hand. */

#ifndef PARTINT_H
#define PARTINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a toolkit call.
 */
typedef enum PartintStatus {
  /**
   * The call succeeded and all out-parameters are valid.
   */
  PARTINT_STATUS_OK = 0,
  /**
   * A pointer was null, an index was out of range, a buffer length did
   * not match, or a string was not valid UTF-8.
   */
  PARTINT_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The expression source failed to parse.
   */
  PARTINT_STATUS_PARSE_ERROR = 2,
  /**
   * No catalog model has the requested id.
   */
  PARTINT_STATUS_UNKNOWN_MODEL = 3,
  /**
   * Evaluation failed: an unbound symbol or a domain violation
   * (division by zero, square root of a negative value, …).
   */
  PARTINT_STATUS_EVAL_ERROR = 4,
  /**
   * Integration failed mid-run: the Newton solve did not converge or
   * the flow left the energy's domain.
   */
  PARTINT_STATUS_DYNAMICS_ERROR = 5,
} PartintStatus;

/**
 * A parsed expression. Create with [`partint_expr_parse`], release with
 * [`partint_expr_free`].
 */
typedef struct PartintExpr PartintExpr;

/**
 * A catalog system: canonical chart, energy, observables. Create with
 * [`partint_model_open`], release with [`partint_model_free`].
 */
typedef struct PartintModel PartintModel;

/**
 * A finished integration run. Create with [`partint_simulate`], release
 * with [`partint_trajectory_free`].
 */
typedef struct PartintTrajectory PartintTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, as a
 * NUL-terminated string. Empty until a call fails. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *partint_last_error_message(void);

/**
 * Releases a string returned through a `char**` out-parameter.
 *
 * # Safety
 * `s` must have come from this library and not have been freed already;
 * null is ignored.
 */
void partint_string_free(char *s);

/**
 * Parses an expression (symbols, rationals, `+ - * / ^`, `sqrt`, `sin`,
 * `cos`, `exp`, `log`) into a new handle.
 *
 * # Safety
 * `source` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the new handle.
 */
enum PartintStatus partint_expr_parse(const char *source, struct PartintExpr **out);

/**
 * Releases an expression handle. Null is ignored.
 *
 * # Safety
 * `expr` must have come from [`partint_expr_parse`] and not have been
 * freed already.
 */
void partint_expr_free(struct PartintExpr *expr);

/**
 * Renders the expression's canonical source text into `*out`.
 *
 * # Safety
 * `expr` must be a live handle; `out` must be a valid pointer. Release
 * `*out` with [`partint_string_free`].
 */
enum PartintStatus partint_expr_source(const struct PartintExpr *expr, char **out);

/**
 * Evaluates the expression with `len` symbol bindings: `names[i]` (a
 * NUL-terminated string) bound to `values[i]`. Every free symbol of the
 * expression must be bound.
 *
 * # Safety
 * `expr` must be a live handle; `names` and `values` must point to `len`
 * valid entries (or `len` must be 0); `out` must be a valid pointer.
 */
enum PartintStatus partint_expr_eval(const struct PartintExpr *expr,
                                     const char *const *names,
                                     const double *values,
                                     uintptr_t len,
                                     double *out);

/**
 * Opens a catalog system by id (`hc`, `hc2`, `Hmf`, `HN`, `HRNrho`,
 * `vol-N2` … `vol-N6`).
 *
 * # Safety
 * `id` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the new handle.
 */
enum PartintStatus partint_model_open(const char *id, struct PartintModel **out);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must have come from [`partint_model_open`] and not have been
 * freed already.
 */
void partint_model_free(struct PartintModel *model);

/**
 * Number of phase-space coordinates of the model's chart (positions plus
 * momenta). Returns 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
uintptr_t partint_model_dim(const struct PartintModel *model);

/**
 * Writes the name of coordinate `index` (chart order: positions first,
 * then momenta) into `*out`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be a valid pointer. Release
 * `*out` with [`partint_string_free`].
 */
enum PartintStatus partint_model_coord_name(const struct PartintModel *model,
                                            uintptr_t index,
                                            char **out);

/**
 * Writes the model's energy as canonical expression source into `*out`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be a valid pointer. Release
 * `*out` with [`partint_string_free`].
 */
enum PartintStatus partint_model_energy_source(const struct PartintModel *model, char **out);

/**
 * Evaluates the canonical Poisson bracket `{f, g}` at the phase point
 * whose coordinates (in chart order) are `coords[0..len]`; `len` must
 * equal [`partint_model_dim`].
 *
 * # Safety
 * All handles must be live; `coords` must point to `len` doubles; `out`
 * must be a valid pointer.
 */
enum PartintStatus partint_bracket_at(const struct PartintModel *model,
                                      const struct PartintExpr *f,
                                      const struct PartintExpr *g,
                                      const double *coords,
                                      uintptr_t len,
                                      double *out);

/**
 * Integrates the model's own energy with the implicit midpoint scheme
 * from the phase point `coords[0..len]` (`len` must equal
 * [`partint_model_dim`]), taking `steps` steps of size `dt`. On success
 * `*out` owns a trajectory of `steps + 1` states.
 *
 * # Safety
 * `model` must be a live handle; `coords` must point to `len` doubles;
 * `out` must be a valid pointer.
 */
enum PartintStatus partint_simulate(const struct PartintModel *model,
                                    const double *coords,
                                    uintptr_t len,
                                    double dt,
                                    uintptr_t steps,
                                    struct PartintTrajectory **out);

/**
 * Releases a trajectory handle. Null is ignored.
 *
 * # Safety
 * `trajectory` must have come from [`partint_simulate`] and not have
 * been freed already.
 */
void partint_trajectory_free(struct PartintTrajectory *trajectory);

/**
 * Number of stored states (steps + 1). Returns 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be a live handle or null.
 */
uintptr_t partint_trajectory_len(const struct PartintTrajectory *trajectory);

/**
 * Number of coordinates per state. Returns 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be a live handle or null.
 */
uintptr_t partint_trajectory_dim(const struct PartintTrajectory *trajectory);

/**
 * Writes the time stamp of state `step` into `*out`.
 *
 * # Safety
 * `trajectory` must be a live handle; `out` must be a valid pointer.
 */
enum PartintStatus partint_trajectory_time(const struct PartintTrajectory *trajectory,
                                           uintptr_t step,
                                           double *out);

/**
 * Copies the coordinates of state `step` (chart order) into
 * `out_coords[0..dim]` with `dim` from [`partint_trajectory_dim`].
 *
 * # Safety
 * `trajectory` must be a live handle; `out_coords` must point to at
 * least `dim` doubles.
 */
enum PartintStatus partint_trajectory_state(const struct PartintTrajectory *trajectory,
                                            uintptr_t step,
                                            double *out_coords);

/**
 * Writes the recorded energy of state `step` into `*out`.
 *
 * # Safety
 * `trajectory` must be a live handle; `out` must be a valid pointer.
 */
enum PartintStatus partint_trajectory_energy(const struct PartintTrajectory *trajectory,
                                             uintptr_t step,
                                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARTINT_H */
