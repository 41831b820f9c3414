/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tscopf.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static const char* contingency1 =
    "{\"id\": \"c1\", \"fault_bus\": 4, \"cleared_branch\": [4, 5], \"clearing_time\": 0.15}";

int main(void) {
  tscopf_case* raw = NULL;
  tscopf_case* c = NULL;
  EXPECT(tscopf_case_load(TSCOPF_DATA_DIR "/missing.json", &raw) == TSCOPF_ERR_IO);
  EXPECT(strlen(tscopf_last_error()) > 0);
  EXPECT(raw == NULL);
  EXPECT(tscopf_case_load(NULL, &raw) == TSCOPF_ERR_ARGUMENT);

  EXPECT(tscopf_case_load(TSCOPF_DATA_DIR "/wecc9.json", &raw) == TSCOPF_OK);
  EXPECT(tscopf_case_bus_count(raw) == 9);
  EXPECT(tscopf_case_generator_count(raw) == 3);
  EXPECT(tscopf_case_scale_loads(raw, -1.0, &c) == TSCOPF_ERR_DOMAIN);
  EXPECT(tscopf_case_scale_loads(raw, 1.5, &c) == TSCOPF_OK);
  tscopf_case_free(raw);

  tscopf_case* imported = NULL;
  EXPECT(tscopf_case_load_matpower(TSCOPF_DATA_DIR "/wecc9.m", TSCOPF_DATA_DIR "/wecc9_dynamics.json", &imported) ==
         TSCOPF_OK);
  EXPECT(tscopf_case_bus_count(imported) == 9);
  tscopf_case_free(imported);

  tscopf_contingency* k = NULL;
  EXPECT(tscopf_contingency_parse("{\"fault_bus\": ", &k) == TSCOPF_ERR_PARSE);
  EXPECT(tscopf_contingency_parse(contingency1, &k) == TSCOPF_OK);
  EXPECT(strcmp(tscopf_contingency_id(k), "c1") == 0);
  EXPECT(tscopf_contingency_set_dt(k, 0.007) == TSCOPF_OK);
  EXPECT(tscopf_contingency_validate(k) == TSCOPF_ERR_DOMAIN);
  EXPECT(tscopf_contingency_set_dt(k, 0.01) == TSCOPF_OK);
  EXPECT(tscopf_contingency_validate(k) == TSCOPF_OK);
  EXPECT(fabs(tscopf_contingency_dt(k) - 0.01) < 1e-15);

  tscopf_result* opf = NULL;
  EXPECT(tscopf_solve_opf(c, NULL, &opf) == TSCOPF_OK);
  EXPECT(tscopf_result_solve_status(opf) == TSCOPF_SOLVE_OPTIMAL);
  EXPECT(fabs(tscopf_result_objective(opf) - 10133.7139796794) < 1e-2);
  double p[3] = {0, 0, 0};
  EXPECT(tscopf_result_p(opf, p, 3) == 3);
  EXPECT(fabs(p[0] - 1.4308) < 1e-3);
  EXPECT(tscopf_result_p(opf, NULL, 0) == 3);
  double v[9];
  EXPECT(tscopf_result_v(opf, v, 9) == 9);

  tscopf_solver_options opts = {0.0, 0.0, 0, 0};
  tscopf_result* ts = NULL;
  EXPECT(tscopf_solve_tscopf(c, k, 1, &opts, &ts) == TSCOPF_OK);
  EXPECT(tscopf_result_trajectory_length(ts) == 501);
  double dev[3];
  EXPECT(tscopf_result_max_coi_deviation(ts, dev, 3) == 3);
  EXPECT(dev[2] < 100.0 * 3.14159265358979 / 180.0);
  char* csv = NULL;
  EXPECT(tscopf_result_trajectories_csv(ts, &csv) == TSCOPF_OK);
  EXPECT(strncmp(csv, "t,delta_g1", 10) == 0);
  tscopf_string_free(csv);
  char* stats = NULL;
  EXPECT(tscopf_result_statistics_json(ts, &stats) == TSCOPF_OK);
  EXPECT(strstr(stats, "\"status\": \"optimal\"") != NULL);
  tscopf_string_free(stats);

  /* A dispatch written out and read back simulates like the original. */
  char* dispatch = NULL;
  EXPECT(tscopf_result_dispatch_json(ts, &dispatch) == TSCOPF_OK);
  tscopf_result* parsed = NULL;
  EXPECT(tscopf_dispatch_parse(dispatch, &parsed) == TSCOPF_OK);
  tscopf_string_free(dispatch);
  tscopf_result* sim_a = NULL;
  tscopf_result* sim_b = NULL;
  EXPECT(tscopf_simulate(c, ts, k, &sim_a) == TSCOPF_OK);
  EXPECT(tscopf_simulate(c, parsed, k, &sim_b) == TSCOPF_OK);
  char* csv_a = NULL;
  char* csv_b = NULL;
  tscopf_result_trajectories_csv(sim_a, &csv_a);
  tscopf_result_trajectories_csv(sim_b, &csv_b);
  EXPECT(csv_a && csv_b && strcmp(csv_a, csv_b) == 0);
  tscopf_string_free(csv_a);
  tscopf_string_free(csv_b);
  EXPECT(tscopf_result_statistics_json(sim_a, &stats) != TSCOPF_OK);

  char* reduced = NULL;
  EXPECT(tscopf_reduce(c, k, &reduced) == TSCOPF_OK);
  EXPECT(strstr(reduced, "\"during_fault\"") != NULL);
  tscopf_string_free(reduced);

  /* Infeasible load keeps the result for inspection. */
  tscopf_case* heavy = NULL;
  EXPECT(tscopf_case_scale_loads(c, 7.0, &heavy) == TSCOPF_OK);
  tscopf_result* failed = NULL;
  const tscopf_status st = tscopf_solve_opf(heavy, NULL, &failed);
  EXPECT(st == TSCOPF_ERR_INFEASIBLE || st == TSCOPF_ERR_NUMERICAL);
  EXPECT(failed != NULL);
  EXPECT(tscopf_result_solve_status(failed) != TSCOPF_SOLVE_OPTIMAL);
  tscopf_result_free(failed);
  tscopf_case_free(heavy);

  EXPECT(strcmp(tscopf_status_name(TSCOPF_ERR_INFEASIBLE), "infeasible") == 0);

  tscopf_result_free(sim_a);
  tscopf_result_free(sim_b);
  tscopf_result_free(parsed);
  tscopf_result_free(ts);
  tscopf_result_free(opf);
  tscopf_contingency_free(k);
  tscopf_case_free(c);
  tscopf_case_free(NULL);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("C interface checks passed\n");
  return failures ? 1 : 0;
}
