#include <math.h>
#include <stdio.h>
#include <string.h>

#include "contest.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, \
              #cond);                                            \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  ContestParamsC p = {0.05, 1.0, 10.0, 0.0, 0.2, 0.0, 0.0, 0.5};
  ContestSolution *sol = NULL;
  CHECK(contest_solve(&p, &sol) == CONTEST_STATUS_OK);

  double k = 0.0;
  CHECK(contest_solution_k_star(sol, &k) == CONTEST_STATUS_OK);
  CHECK(fabs(k - 0.5879189449534926) < 1e-10);

  double v = 0.0;
  CHECK(contest_solution_eval(sol, 0.0, &v) == CONTEST_STATUS_OK);
  CHECK(fabs(v - 1.4641016151377544) < 1e-10);

  ContestRegime regime = -1;
  CHECK(contest_solution_regime(sol, &regime) == CONTEST_STATUS_OK);
  CHECK(regime == CONTEST_REGIME_LOW);

  char *json = NULL;
  CHECK(contest_solution_to_json(sol, &json) == CONTEST_STATUS_OK);
  CHECK(strstr(json, "\"k_star\"") != NULL);
  contest_string_free(json);
  contest_solution_free(sol);

  p.sigma = -1.0;
  sol = NULL;
  CHECK(contest_solve(&p, &sol) == CONTEST_STATUS_VALIDATION);
  CHECK(sol == NULL);
  CHECK(strstr(contest_last_error_message(), "sigma") != NULL);
  CHECK(contest_solution_k_star(NULL, &k) == CONTEST_STATUS_NULL_POINTER);

  printf("ok\n");
  return 0;
}
