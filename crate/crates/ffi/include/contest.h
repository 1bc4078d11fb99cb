#ifndef CONTEST_H
#define CONTEST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum ContestRegime
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  CONTEST_REGIME_LOW = 0,
  CONTEST_REGIME_MEDIUM = 1,
  CONTEST_REGIME_HIGH = 2,
};
#ifndef __cplusplus
typedef int32_t ContestRegime;
#endif // __cplusplus

enum ContestStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  CONTEST_STATUS_OK = 0,
  CONTEST_STATUS_VALIDATION = 2,
  CONTEST_STATUS_NO_CONVERGENCE = 3,
  CONTEST_STATUS_SIM_RESOLUTION = 4,
  CONTEST_STATUS_DESIGN = 5,
  CONTEST_STATUS_NULL_POINTER = -1,
  CONTEST_STATUS_PANIC = -2,
};
#ifndef __cplusplus
typedef int32_t ContestStatus;
#endif // __cplusplus

/**
 * Opaque equilibrium handle.
 */
typedef struct ContestSolution ContestSolution;

/**
 * Contest primitives. Set `prize_lose` and `hazard_follow` to zero for the
 * baseline contest.
 */
typedef struct ContestParamsC {
  double r;
  double c;
  double prize_win;
  double prize_lose;
  double hazard_lead;
  double hazard_follow;
  double pi;
  double sigma;
} ContestParamsC;

/**
 * Monte Carlo summary from agent i's side; `*_se` are standard errors.
 */
typedef struct ContestSimSummary {
  double payoff_i;
  double payoff_i_se;
  double payoff_j;
  double payoff_j_se;
  double win_prob_i;
  double win_prob_j;
  double success_time;
  double success_time_se;
  double follower_time;
  double follower_time_se;
  size_t horizon_cap_reached;
} ContestSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL if none. Owned by
 * the library.
 */
const char *contest_last_error_message(void);

/**
 * Parses and validates a JSON parameter object.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_params` writable.
 */
ContestStatus contest_params_from_json(const char *json, struct ContestParamsC *out_params);

/**
 * Profitability φ̄.
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_profitability(const struct ContestParamsC *params, double *out_phi);

/**
 * The threshold shape f(φ) for φ ≥ 1.
 *
 * # Safety
 * `out_f` must be writable.
 */
ContestStatus contest_f_of_phi(double phi, double *out_f);

/**
 * Return regime of the risky move and the π/σ threshold.
 *
 * # Safety
 * `params` must be valid; `out_threshold` may be NULL.
 */
ContestStatus contest_classify(const struct ContestParamsC *params,
                               ContestRegime *out_regime,
                               double *out_threshold);

/**
 * Solves for the equilibrium. On success `*out_solution` holds a handle
 * to free with [`contest_solution_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_solve(const struct ContestParamsC *params,
                            struct ContestSolution **out_solution);

/**
 * [`contest_solve`] from a JSON parameter object.
 *
 * # Safety
 * `json` must be NUL-terminated and `out_solution` writable.
 */
ContestStatus contest_solve_json(const char *json, struct ContestSolution **out_solution);

/**
 * # Safety
 * `solution` must come from a solve call and not be used afterwards. NULL is a no-op.
 */
void contest_solution_free(struct ContestSolution *solution);

/**
 * Dropout boundary k*.
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_solution_k_star(const struct ContestSolution *solution, double *out_k);

/**
 * Leader switching point k**; NaN outside the Medium regime.
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_solution_k_star_star(const struct ContestSolution *solution, double *out_k);

/**
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_solution_regime(const struct ContestSolution *solution,
                                      ContestRegime *out_regime);

/**
 * Value V(Δk) on [−k*, k*].
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_solution_eval(const struct ContestSolution *solution,
                                    double dk,
                                    double *out_value);

/**
 * Full solution as JSON. Free with [`contest_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_solution_to_json(const struct ContestSolution *solution, char **out_json);

/**
 * Runs the equilibrium verifier with `grid_n` points per region.
 * `out_passed` is set to 1 when every check holds within `tol`.
 *
 * # Safety
 * `solution` and `out_passed` must be valid; `out_max_residual` may be NULL.
 */
ContestStatus contest_verify(const struct ContestSolution *solution,
                             size_t grid_n,
                             double tol,
                             int32_t *out_passed,
                             double *out_max_residual);

/**
 * Monte Carlo under the equilibrium strategies from gap `k0`.
 *
 * # Safety
 * Pointers must be valid.
 */
ContestStatus contest_simulate(const struct ContestSolution *solution,
                               size_t n_paths,
                               double dt,
                               double k0,
                               uint64_t seed,
                               struct ContestSimSummary *out_summary);

/**
 * Optimal prize allocation for a JSON design problem, returned as JSON.
 * Free the result with [`contest_string_free`].
 *
 * # Safety
 * `problem_json` must be NUL-terminated and `out_json` writable.
 */
ContestStatus contest_optimize_prizes(const char *problem_json, char **out_json);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is a no-op.
 */
void contest_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTEST_H */
