/* C interface to the TSC-OPF library.
 *
 * Objects are opaque handles released with their *_free function. Every
 * function returns a tscopf_status; on failure tscopf_last_error() gives a
 * message for the calling thread. Strings returned through char** are
 * allocated by the library and released with tscopf_string_free.
 */
#ifndef TSCOPF_H
#define TSCOPF_H

#include <stddef.h>

#if defined(TSCOPF_BUILDING_LIBRARY)
#define TSCOPF_API __attribute__((visibility("default")))
#else
#define TSCOPF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  TSCOPF_OK = 0,
  TSCOPF_ERR_ARGUMENT = 1,
  TSCOPF_ERR_PARSE = 2,
  TSCOPF_ERR_VALIDATION = 3,
  TSCOPF_ERR_DOMAIN = 4,
  TSCOPF_ERR_UNSUPPORTED = 5,
  TSCOPF_ERR_SINGULAR = 6,
  TSCOPF_ERR_INTEGRATION = 7,
  TSCOPF_ERR_INDEX = 8,
  TSCOPF_ERR_IO = 9,
  /* The optimisation finished without a usable point. The result handle is
     still returned so that it can be inspected. */
  TSCOPF_ERR_INFEASIBLE = 10,
  TSCOPF_ERR_NUMERICAL = 11,
  TSCOPF_ERR_INTERNAL = 12
} tscopf_status;

typedef enum {
  TSCOPF_SOLVE_OPTIMAL = 0,
  TSCOPF_SOLVE_ACCEPTABLE = 1,
  TSCOPF_SOLVE_INFEASIBLE = 2,
  TSCOPF_SOLVE_ITERATION_LIMIT = 3,
  TSCOPF_SOLVE_NUMERICAL_FAILURE = 4
} tscopf_solve_status;

typedef enum { TSCOPF_DELTA = 0, TSCOPF_OMEGA = 1 } tscopf_quantity;

typedef struct tscopf_case tscopf_case;
typedef struct tscopf_contingency tscopf_contingency;
typedef struct tscopf_result tscopf_result;
typedef struct tscopf_report tscopf_report;

/* Zero or negative fields keep the library defaults. */
typedef struct {
  double tol_kkt;
  double tol_feas;
  int max_iterations;
  /* Per-iteration solver log on stderr when nonzero. */
  int verbose;
} tscopf_solver_options;

TSCOPF_API const char* tscopf_last_error(void);
TSCOPF_API const char* tscopf_status_name(tscopf_status status);
TSCOPF_API void tscopf_string_free(char* s);

/* Cases. */
TSCOPF_API tscopf_status tscopf_case_load(const char* path, tscopf_case** out);
TSCOPF_API tscopf_status tscopf_case_load_matpower(const char* path, const char* sidecar, tscopf_case** out);
TSCOPF_API tscopf_status tscopf_case_scale_loads(const tscopf_case* c, double factor, tscopf_case** out);
TSCOPF_API size_t tscopf_case_bus_count(const tscopf_case* c);
TSCOPF_API size_t tscopf_case_generator_count(const tscopf_case* c);
TSCOPF_API void tscopf_case_free(tscopf_case* c);

/* Contingencies (JSON text; see the README for the fields). */
TSCOPF_API tscopf_status tscopf_contingency_parse(const char* json_text, tscopf_contingency** out);
TSCOPF_API tscopf_status tscopf_contingency_set_dt(tscopf_contingency* k, double dt);
TSCOPF_API tscopf_status tscopf_contingency_set_horizon(tscopf_contingency* k, double horizon);
TSCOPF_API double tscopf_contingency_dt(const tscopf_contingency* k);
TSCOPF_API const char* tscopf_contingency_id(const tscopf_contingency* k);
/* TSCOPF_ERR_DOMAIN when dt, clearing time and horizon are inconsistent. */
TSCOPF_API tscopf_status tscopf_contingency_validate(const tscopf_contingency* k);
TSCOPF_API void tscopf_contingency_free(tscopf_contingency* k);

/* Studies. `options` may be NULL. */
TSCOPF_API tscopf_status tscopf_solve_opf(const tscopf_case* c, const tscopf_solver_options* options,
                                          tscopf_result** out);
/* correction_passes = 0 solves with flat 1 p.u. load voltages only; each
   further pass re-solves with load admittances from the previous voltages. */
TSCOPF_API tscopf_status tscopf_solve_tscopf(const tscopf_case* c, const tscopf_contingency* k,
                                             int correction_passes, const tscopf_solver_options* options,
                                             tscopf_result** out);
/* Benchmark simulation of `dispatch` (an OPF or TSC-OPF result, or one read
   with tscopf_dispatch_parse) with load admittances from its voltages. */
TSCOPF_API tscopf_status tscopf_simulate(const tscopf_case* c, const tscopf_result* dispatch,
                                         const tscopf_contingency* k, tscopf_result** out);
TSCOPF_API tscopf_status tscopf_dispatch_parse(const char* json_text, tscopf_result** out);
TSCOPF_API tscopf_status tscopf_compare(const tscopf_case* c, const tscopf_contingency* k, int correction_passes,
                                        const tscopf_solver_options* options, tscopf_report** out);

/* During- and post-fault reduced networks with flat load voltages, JSON. */
TSCOPF_API tscopf_status tscopf_reduce(const tscopf_case* c, const tscopf_contingency* k, char** json_out);
/* Variables and constraint rows of the flat-start TSC-OPF problem, JSON. */
TSCOPF_API tscopf_status tscopf_nlp_dump(const tscopf_case* c, const tscopf_contingency* k, char** json_out);

/* Result accessors. Array getters copy min(n, available) values and return
   the available count. */
TSCOPF_API tscopf_solve_status tscopf_result_solve_status(const tscopf_result* r);
TSCOPF_API size_t tscopf_result_iterations(const tscopf_result* r);
TSCOPF_API double tscopf_result_objective(const tscopf_result* r);
TSCOPF_API const char* tscopf_result_message(const tscopf_result* r);
TSCOPF_API size_t tscopf_result_p(const tscopf_result* r, double* out, size_t n);
TSCOPF_API size_t tscopf_result_q(const tscopf_result* r, double* out, size_t n);
TSCOPF_API size_t tscopf_result_v(const tscopf_result* r, double* out, size_t n);
/* Largest |delta_g - delta_COI| per generator (rad); empty without trajectories. */
TSCOPF_API size_t tscopf_result_max_coi_deviation(const tscopf_result* r, double* out, size_t n);
TSCOPF_API size_t tscopf_result_trajectory_length(const tscopf_result* r);
TSCOPF_API tscopf_status tscopf_result_dispatch_json(const tscopf_result* r, char** out);
TSCOPF_API tscopf_status tscopf_result_trajectories_csv(const tscopf_result* r, char** out);
TSCOPF_API tscopf_status tscopf_result_statistics_json(const tscopf_result* r, char** out);
TSCOPF_API void tscopf_result_free(tscopf_result* r);

/* Comparison reports. */
TSCOPF_API tscopf_status tscopf_report_json(const tscopf_report* r, char** out);
TSCOPF_API tscopf_status tscopf_report_markdown(const tscopf_report* r, char** out);
/* SVG overlay of every variant and the benchmark for one generator. */
TSCOPF_API tscopf_status tscopf_report_plot_svg(const tscopf_report* r, size_t generator, tscopf_quantity quantity,
                                                char** out);
TSCOPF_API size_t tscopf_report_generator_count(const tscopf_report* r);
/* MAE of one variant (0..4 in table order) for one generator. */
TSCOPF_API double tscopf_report_mae(const tscopf_report* r, size_t variant, size_t generator, tscopf_quantity quantity);
TSCOPF_API void tscopf_report_free(tscopf_report* r);

#ifdef __cplusplus
}
#endif

#endif
