#include "tscopf.h"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "tscopf/comparison.hpp"
#include "tscopf/errors.hpp"
#include "tscopf/io.hpp"
#include "tscopf/svg_plot.hpp"
#include "tscopf/tscopf.hpp"

struct tscopf_case {
  tscopf::Case value;
};

struct tscopf_contingency {
  tscopf::ContingencySpec value;
};

struct tscopf_result {
  std::optional<tscopf::Case> source_case;
  tscopf::DispatchSolution dispatch;
  std::optional<tscopf::TrajectorySet> trajectories;
  std::optional<tscopf::nlp::SolveReport> report;
  std::vector<double> max_coi_deviation;
  std::string statistics;
  std::string message;
};

struct tscopf_report {
  tscopf::ComparisonReport value;
};

namespace {

thread_local std::string last_error;

tscopf_status code_of(tscopf::ErrorCode code) {
  using tscopf::ErrorCode;
  switch (code) {
    case ErrorCode::parse: return TSCOPF_ERR_PARSE;
    case ErrorCode::validation: return TSCOPF_ERR_VALIDATION;
    case ErrorCode::domain: return TSCOPF_ERR_DOMAIN;
    case ErrorCode::unsupported: return TSCOPF_ERR_UNSUPPORTED;
    case ErrorCode::singular: return TSCOPF_ERR_SINGULAR;
    case ErrorCode::integration: return TSCOPF_ERR_INTEGRATION;
    case ErrorCode::index: return TSCOPF_ERR_INDEX;
    case ErrorCode::io: return TSCOPF_ERR_IO;
    case ErrorCode::stage_failure: return TSCOPF_ERR_NUMERICAL;
  }
  return TSCOPF_ERR_INTERNAL;
}

tscopf_status fail(tscopf_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
tscopf_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const tscopf::StageError& e) {
    if (e.infeasible()) return fail(TSCOPF_ERR_INFEASIBLE, e.what());
    return fail(e.cause() == tscopf::ErrorCode::stage_failure ? TSCOPF_ERR_NUMERICAL : code_of(e.cause()), e.what());
  } catch (const tscopf::Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::invalid_argument& e) {
    return fail(TSCOPF_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TSCOPF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TSCOPF_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

size_t copy_array(const std::vector<double>& v, double* out, size_t n) {
  if (out != nullptr) {
    for (size_t i = 0; i < std::min(n, v.size()); ++i) out[i] = v[i];
  }
  return v.size();
}

void apply(const tscopf_solver_options* o, tscopf::nlp::SolverOptions& solver) {
  if (o == nullptr) return;
  if (o->tol_kkt > 0) solver.tol_kkt = o->tol_kkt;
  if (o->tol_feas > 0) solver.tol_feas = o->tol_feas;
  if (o->max_iterations > 0) solver.max_iterations = o->max_iterations;
  if (o->verbose) solver.log = &std::cerr;
}

tscopf_status solver_outcome(const tscopf::nlp::SolveReport& report) {
  using tscopf::nlp::SolveStatus;
  switch (report.status) {
    case SolveStatus::optimal:
    case SolveStatus::acceptable: return TSCOPF_OK;
    case SolveStatus::infeasible: return fail(TSCOPF_ERR_INFEASIBLE, report.message);
    default: return fail(TSCOPF_ERR_NUMERICAL, report.message);
  }
}

#define REQUIRE(cond, what) \
  if (!(cond)) return fail(TSCOPF_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* tscopf_last_error(void) { return last_error.c_str(); }

const char* tscopf_status_name(tscopf_status status) {
  switch (status) {
    case TSCOPF_OK: return "ok";
    case TSCOPF_ERR_ARGUMENT: return "invalid argument";
    case TSCOPF_ERR_PARSE: return "parse error";
    case TSCOPF_ERR_VALIDATION: return "validation error";
    case TSCOPF_ERR_DOMAIN: return "domain error";
    case TSCOPF_ERR_UNSUPPORTED: return "unsupported feature";
    case TSCOPF_ERR_SINGULAR: return "singular matrix";
    case TSCOPF_ERR_INTEGRATION: return "integration failure";
    case TSCOPF_ERR_INDEX: return "index error";
    case TSCOPF_ERR_IO: return "i/o error";
    case TSCOPF_ERR_INFEASIBLE: return "infeasible";
    case TSCOPF_ERR_NUMERICAL: return "numerical failure";
    case TSCOPF_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void tscopf_string_free(char* s) { std::free(s); }

tscopf_status tscopf_case_load(const char* path, tscopf_case** out) {
  REQUIRE(path && out, "null argument");
  return guarded([&] {
    auto c = std::make_unique<tscopf_case>();
    c->value = tscopf::parse_case(path);
    tscopf::validate(c->value);
    *out = c.release();
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_case_load_matpower(const char* path, const char* sidecar, tscopf_case** out) {
  REQUIRE(path && sidecar && out, "null argument");
  return guarded([&] {
    auto c = std::make_unique<tscopf_case>();
    c->value = tscopf::import_matpower(path, sidecar);
    tscopf::validate(c->value);
    *out = c.release();
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_case_scale_loads(const tscopf_case* c, double factor, tscopf_case** out) {
  REQUIRE(c && out, "null argument");
  return guarded([&] {
    auto scaled = std::make_unique<tscopf_case>();
    scaled->value = tscopf::scale_loads(c->value, factor);
    *out = scaled.release();
    return TSCOPF_OK;
  });
}

size_t tscopf_case_bus_count(const tscopf_case* c) { return c ? c->value.bus_count() : 0; }
size_t tscopf_case_generator_count(const tscopf_case* c) { return c ? c->value.generator_count() : 0; }
void tscopf_case_free(tscopf_case* c) { delete c; }

tscopf_status tscopf_contingency_parse(const char* json_text, tscopf_contingency** out) {
  REQUIRE(json_text && out, "null argument");
  return guarded([&] {
    auto k = std::make_unique<tscopf_contingency>();
    k->value = tscopf::parse_contingency_json(json_text);
    *out = k.release();
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_contingency_set_dt(tscopf_contingency* k, double dt) {
  REQUIRE(k, "null argument");
  REQUIRE(dt > 0.0, "dt must be positive");
  k->value.dt = dt;
  return TSCOPF_OK;
}

tscopf_status tscopf_contingency_set_horizon(tscopf_contingency* k, double horizon) {
  REQUIRE(k, "null argument");
  REQUIRE(horizon > 0.0, "horizon must be positive");
  k->value.horizon = horizon;
  return TSCOPF_OK;
}

double tscopf_contingency_dt(const tscopf_contingency* k) { return k ? k->value.dt : 0.0; }
const char* tscopf_contingency_id(const tscopf_contingency* k) { return k ? k->value.id.c_str() : ""; }

tscopf_status tscopf_contingency_validate(const tscopf_contingency* k) {
  REQUIRE(k, "null argument");
  return guarded([&] {
    tscopf::validate(k->value);
    return TSCOPF_OK;
  });
}

void tscopf_contingency_free(tscopf_contingency* k) { delete k; }

tscopf_status tscopf_solve_opf(const tscopf_case* c, const tscopf_solver_options* options, tscopf_result** out) {
  REQUIRE(c && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    tscopf::OpfOptions o;
    apply(options, o.solver);
    const auto r = tscopf::solve_opf(c->value, o);
    auto res = std::make_unique<tscopf_result>();
    res->source_case = c->value;
    res->dispatch = r.dispatch;
    res->report = r.report;
    res->message = r.report.message;
    *out = res.release();
    return solver_outcome(r.report);
  });
}

tscopf_status tscopf_solve_tscopf(const tscopf_case* c, const tscopf_contingency* k, int correction_passes,
                                  const tscopf_solver_options* options, tscopf_result** out) {
  REQUIRE(c && k && out, "null argument");
  REQUIRE(correction_passes >= 0, "correction_passes must be non-negative");
  *out = nullptr;
  return guarded([&] {
    const auto& cs = c->value;
    tscopf::validate(k->value);
    tscopf::OpfOptions opf_options;
    apply(options, opf_options.solver);
    const auto opf = tscopf::solve_opf(cs, opf_options);
    if (tscopf_status s = solver_outcome(opf.report); s != TSCOPF_OK) {
      last_error = "AC-OPF: " + last_error;
      return s;
    }
    tscopf::TscopfOptions o;
    apply(options, o.solver);

    auto assumption = tscopf::LoadVoltageAssumption::flat();
    tscopf::DispatchSolution start = opf.dispatch;
    tscopf::TscopfResult r = tscopf::solve_tscopf(cs, k->value, assumption, start, o);
    for (int pass = 0; pass < correction_passes && solver_outcome(r.report) == TSCOPF_OK; ++pass) {
      assumption = tscopf::LoadVoltageAssumption::from_voltages(r.dispatch.v);
      // Fine grids get a coarse pre-solve under the new assumption instead,
      // which converges far more reliably than a cross-assumption start.
      if (k->value.dt >= o.coarse_start_dt) o.initial_trajectories = r.trajectories;
      start = r.dispatch;
      r = tscopf::solve_tscopf(cs, k->value, assumption, start, o);
    }

    auto res = std::make_unique<tscopf_result>();
    res->source_case = cs;
    res->dispatch = r.dispatch;
    res->trajectories = r.trajectories;
    res->report = r.report;
    res->max_coi_deviation = r.max_coi_deviation;
    res->message = r.report.message;
    // Sizes come from a fresh build of the same problem.
    const auto model = tscopf::build_tscopf_model(cs, k->value, assumption, start, o.delta_limit);
    res->statistics = tscopf::nlp_statistics_json(*model.problem, r.report);
    *out = res.release();
    return solver_outcome(r.report);
  });
}

tscopf_status tscopf_simulate(const tscopf_case* c, const tscopf_result* dispatch, const tscopf_contingency* k,
                              tscopf_result** out) {
  REQUIRE(c && dispatch && k && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto& d = dispatch->dispatch;
    if (d.v.size() != c->value.bus_count() || d.p.size() != c->value.generator_count())
      return fail(TSCOPF_ERR_ARGUMENT, "dispatch does not match the case dimensions");
    tscopf::SimulationOptions sim;
    sim.event = tscopf::EventTreatment::split_at_event;
    auto traj = tscopf::simulate(c->value, d, k->value, tscopf::LoadVoltageAssumption::from_voltages(d.v), sim);
    traj.correction = "benchmark";
    auto res = std::make_unique<tscopf_result>();
    res->source_case = c->value;
    res->dispatch = d;
    std::vector<double> inertia;
    for (const auto& g : c->value.generators) inertia.push_back(g.h);
    for (const auto& series : traj.coi_relative_delta(inertia)) {
      double m = 0.0;
      for (double v : series) m = std::max(m, std::abs(v));
      res->max_coi_deviation.push_back(m);
    }
    res->trajectories = std::move(traj);
    *out = res.release();
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_dispatch_parse(const char* json_text, tscopf_result** out) {
  REQUIRE(json_text && out, "null argument");
  return guarded([&] {
    auto res = std::make_unique<tscopf_result>();
    res->dispatch = tscopf::parse_dispatch_json(json_text);
    *out = res.release();
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_compare(const tscopf_case* c, const tscopf_contingency* k, int correction_passes,
                             const tscopf_solver_options* options, tscopf_report** out) {
  REQUIRE(c && k && out, "null argument");
  REQUIRE(correction_passes >= 1, "a comparison needs at least one correction pass");
  *out = nullptr;
  return guarded([&] {
    tscopf::ComparisonOptions o;
    o.correction_iterations = correction_passes;
    apply(options, o.opf.solver);
    apply(options, o.tscopf.solver);
    auto rep = std::make_unique<tscopf_report>();
    rep->value = tscopf::run_comparison(c->value, k->value, o);
    *out = rep.release();
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_reduce(const tscopf_case* c, const tscopf_contingency* k, char** json_out) {
  REQUIRE(c && k && json_out, "null argument");
  return guarded([&] {
    const auto flat = tscopf::LoadVoltageAssumption::flat();
    const auto pre = tscopf::build_pre_fault_network(c->value, flat);
    const auto stages = tscopf::build_stage_networks(c->value, k->value, flat);
    std::string text = "{\n\"pre_fault\": " + tscopf::reduced_network_json(c->value, pre) +
                       ",\n\"during_fault\": " + tscopf::reduced_network_json(c->value, stages.during) +
                       ",\n\"post_fault\": " + tscopf::reduced_network_json(c->value, stages.post) + "}\n";
    *json_out = copy_string(text);
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_nlp_dump(const tscopf_case* c, const tscopf_contingency* k, char** json_out) {
  REQUIRE(c && k && json_out, "null argument");
  return guarded([&] {
    const auto opf = tscopf::solve_opf(c->value);
    if (tscopf_status s = solver_outcome(opf.report); s != TSCOPF_OK) return s;
    const auto model =
        tscopf::build_tscopf_model(c->value, k->value, tscopf::LoadVoltageAssumption::flat(), opf.dispatch);
    *json_out = copy_string(tscopf::nlp_dump_json(*model.problem));
    return TSCOPF_OK;
  });
}

tscopf_solve_status tscopf_result_solve_status(const tscopf_result* r) {
  if (r == nullptr || !r->report) return TSCOPF_SOLVE_OPTIMAL;
  return static_cast<tscopf_solve_status>(r->report->status);
}

size_t tscopf_result_iterations(const tscopf_result* r) { return r && r->report ? r->report->iterations : 0; }
double tscopf_result_objective(const tscopf_result* r) { return r ? r->dispatch.objective : 0.0; }
const char* tscopf_result_message(const tscopf_result* r) { return r ? r->message.c_str() : ""; }

size_t tscopf_result_p(const tscopf_result* r, double* out, size_t n) { return r ? copy_array(r->dispatch.p, out, n) : 0; }
size_t tscopf_result_q(const tscopf_result* r, double* out, size_t n) { return r ? copy_array(r->dispatch.q, out, n) : 0; }
size_t tscopf_result_v(const tscopf_result* r, double* out, size_t n) { return r ? copy_array(r->dispatch.v, out, n) : 0; }

size_t tscopf_result_max_coi_deviation(const tscopf_result* r, double* out, size_t n) {
  return r ? copy_array(r->max_coi_deviation, out, n) : 0;
}

size_t tscopf_result_trajectory_length(const tscopf_result* r) {
  return r && r->trajectories ? r->trajectories->size() : 0;
}

tscopf_status tscopf_result_dispatch_json(const tscopf_result* r, char** out) {
  REQUIRE(r && out, "null argument");
  REQUIRE(r->source_case, "result carries no case");
  return guarded([&] {
    *out = copy_string(tscopf::dispatch_json(*r->source_case, r->dispatch));
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_result_trajectories_csv(const tscopf_result* r, char** out) {
  REQUIRE(r && out, "null argument");
  REQUIRE(r->trajectories, "result has no trajectories");
  return guarded([&] {
    *out = copy_string(tscopf::trajectories_csv(*r->trajectories));
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_result_statistics_json(const tscopf_result* r, char** out) {
  REQUIRE(r && out, "null argument");
  REQUIRE(!r->statistics.empty(), "result has no problem statistics");
  return guarded([&] {
    *out = copy_string(r->statistics);
    return TSCOPF_OK;
  });
}

void tscopf_result_free(tscopf_result* r) { delete r; }

tscopf_status tscopf_report_json(const tscopf_report* r, char** out) {
  REQUIRE(r && out, "null argument");
  return guarded([&] {
    *out = copy_string(tscopf::report_json(r->value));
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_report_markdown(const tscopf_report* r, char** out) {
  REQUIRE(r && out, "null argument");
  return guarded([&] {
    *out = copy_string(tscopf::report_markdown(r->value));
    return TSCOPF_OK;
  });
}

tscopf_status tscopf_report_plot_svg(const tscopf_report* r, size_t generator, tscopf_quantity quantity, char** out) {
  REQUIRE(r && out, "null argument");
  return guarded([&] {
    const auto q = quantity == TSCOPF_DELTA ? tscopf::Quantity::delta : tscopf::Quantity::omega;
    *out = copy_string(tscopf::render_svg(tscopf::comparison_plot(r->value, generator, q)));
    return TSCOPF_OK;
  });
}

size_t tscopf_report_generator_count(const tscopf_report* r) { return r ? r->value.generator_count : 0; }

double tscopf_report_mae(const tscopf_report* r, size_t variant, size_t generator, tscopf_quantity quantity) {
  if (r == nullptr || variant >= r->value.variants.size() || generator >= r->value.generator_count) return -1.0;
  const auto& v = r->value.variants[variant];
  return quantity == TSCOPF_DELTA ? v.mae_delta[generator] : v.mae_omega[generator];
}

void tscopf_report_free(tscopf_report* r) { delete r; }

}  // extern "C"
