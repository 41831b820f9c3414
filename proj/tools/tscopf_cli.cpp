// Command-line front end. Uses only the C interface of the library.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tscopf.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { exit_ok = 0, exit_usage = 1, exit_infeasible = 2, exit_numerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(tscopf_status s) {
  switch (s) {
    case TSCOPF_OK: return exit_ok;
    case TSCOPF_ERR_INFEASIBLE: return exit_infeasible;
    case TSCOPF_ERR_NUMERICAL:
    case TSCOPF_ERR_SINGULAR:
    case TSCOPF_ERR_INTEGRATION:
    case TSCOPF_ERR_INTERNAL: return exit_numerical;
    default: return exit_usage;
  }
}

// Error carrying a library status, reported once in main.
struct LibraryError : std::runtime_error {
  tscopf_status status;
  LibraryError(tscopf_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(tscopf_status s, const std::string& context) {
  if (s != TSCOPF_OK) throw LibraryError(s, context + ": " + tscopf_last_error());
}

struct CaseDeleter {
  void operator()(tscopf_case* p) const { tscopf_case_free(p); }
};
struct ContingencyDeleter {
  void operator()(tscopf_contingency* p) const { tscopf_contingency_free(p); }
};
struct ResultDeleter {
  void operator()(tscopf_result* p) const { tscopf_result_free(p); }
};
struct ReportDeleter {
  void operator()(tscopf_report* p) const { tscopf_report_free(p); }
};
using CasePtr = std::unique_ptr<tscopf_case, CaseDeleter>;
using ContingencyPtr = std::unique_ptr<tscopf_contingency, ContingencyDeleter>;
using ResultPtr = std::unique_ptr<tscopf_result, ResultDeleter>;
using ReportPtr = std::unique_ptr<tscopf_report, ReportDeleter>;

std::string take(char* s) {
  std::string out(s ? s : "");
  tscopf_string_free(s);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw UsageError("error writing " + path.string());
}

// "10ms", "0.01", "0.01s", "1 ms" -> seconds.
double parse_seconds(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  double scale = 1.0;
  if (t.size() > 2 && t.compare(t.size() - 2, 2, "ms") == 0) {
    scale = 1e-3;
    t.resize(t.size() - 2);
  } else if (t.size() > 1 && t.back() == 's') {
    t.pop_back();
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || !(v > 0.0)) throw UsageError("invalid duration '" + text + "'");
  return v * scale;
}

struct Settings {
  std::string case_path;
  std::string sidecar;  // MATPOWER cases only
  double load_scale = 1.0;
  std::vector<std::string> contingencies;  // file paths or inline JSON
  std::optional<double> dt;
  std::optional<double> horizon;
  std::string correction = "once";
  int correction_iters = 1;
  std::string dispatch_path;
  tscopf_solver_options solver{0.0, 0.0, 0, 0};
  std::string out = "out";
  bool force = false;
  bool dump_nlp = false;
};

// Config file values; paths are relative to the config file.
void load_config(const fs::path& path, Settings& s) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError(path.string() + ": top level must be an object");
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
  try {
    if (doc.contains("case")) s.case_path = resolve(doc["case"].get<std::string>());
    if (doc.contains("dynamics")) s.sidecar = resolve(doc["dynamics"].get<std::string>());
    if (doc.contains("load_scale")) s.load_scale = doc["load_scale"].get<double>();
    if (doc.contains("contingencies")) {
      for (const auto& k : doc["contingencies"]) {
        s.contingencies.push_back(k.is_string() ? resolve(k.get<std::string>()) : k.dump());
      }
    }
    if (doc.contains("dt")) s.dt = doc["dt"].is_string() ? parse_seconds(doc["dt"].get<std::string>()) : doc["dt"].get<double>();
    if (doc.contains("horizon"))
      s.horizon = doc["horizon"].is_string() ? parse_seconds(doc["horizon"].get<std::string>()) : doc["horizon"].get<double>();
    if (doc.contains("correction")) s.correction = doc["correction"].get<std::string>();
    if (doc.contains("correction_iters")) s.correction_iters = doc["correction_iters"].get<int>();
    if (doc.contains("out")) s.out = resolve(doc["out"].get<std::string>());
    if (doc.contains("solver")) {
      const auto& so = doc["solver"];
      s.solver.tol_kkt = so.value("tol_kkt", 0.0);
      s.solver.tol_feas = so.value("tol_feas", 0.0);
      s.solver.max_iterations = so.value("max_iterations", 0);
    }
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

CasePtr load_case(const Settings& s) {
  if (s.case_path.empty()) throw UsageError("no case given (--case or config)");
  tscopf_case* raw = nullptr;
  const bool matpower = fs::path(s.case_path).extension() == ".m";
  if (matpower && s.sidecar.empty()) throw UsageError("MATPOWER cases need a dynamics file (--dynamics)");
  check(matpower ? tscopf_case_load_matpower(s.case_path.c_str(), s.sidecar.c_str(), &raw)
                 : tscopf_case_load(s.case_path.c_str(), &raw),
        "loading case");
  CasePtr c(raw);
  if (s.load_scale != 1.0) {
    tscopf_case* scaled = nullptr;
    check(tscopf_case_scale_loads(c.get(), s.load_scale, &scaled), "scaling loads");
    c.reset(scaled);
  }
  return c;
}

ContingencyPtr load_contingency(const Settings& s, const std::string& source) {
  const bool inline_json = !source.empty() && source.front() == '{';
  const std::string text = inline_json ? source : read_file(source);
  tscopf_contingency* raw = nullptr;
  check(tscopf_contingency_parse(text.c_str(), &raw), inline_json ? "contingency" : source);
  ContingencyPtr k(raw);
  if (s.dt) check(tscopf_contingency_set_dt(k.get(), *s.dt), "--dt");
  if (s.horizon) check(tscopf_contingency_set_horizon(k.get(), *s.horizon), "--horizon");
  if (tscopf_contingency_validate(k.get()) != TSCOPF_OK) throw UsageError(tscopf_last_error());
  return k;
}

std::vector<ContingencyPtr> load_contingencies(const Settings& s, bool exactly_one) {
  if (s.contingencies.empty()) throw UsageError("no contingency given (--contingency or config)");
  if (exactly_one && s.contingencies.size() != 1) throw UsageError("this command takes exactly one contingency");
  std::vector<ContingencyPtr> out;
  for (const auto& src : s.contingencies) out.push_back(load_contingency(s, src));
  return out;
}

int correction_passes(const Settings& s) {
  if (s.correction == "none") return 0;
  if (s.correction == "once") return s.correction_iters;
  throw UsageError("--correction must be none or once");
}

// Refuses to reuse a non-empty output directory unless forced.
fs::path prepare_output(const Settings& s) {
  const fs::path out(s.out);
  std::error_code ec;
  if (fs::exists(out, ec)) {
    if (!fs::is_directory(out, ec)) throw UsageError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out, ec) && !s.force)
      throw UsageError("output directory " + out.string() + " is not empty; use --force to overwrite");
  }
  fs::create_directories(out, ec);
  if (ec) throw UsageError("cannot create " + out.string() + ": " + ec.message());
  return out;
}

void print_dispatch(const tscopf_result* r) {
  double p[64];
  const size_t ng = std::min<size_t>(tscopf_result_p(r, p, 64), 64);
  std::printf("objective %.6f\nP =", tscopf_result_objective(r));
  for (size_t g = 0; g < ng; ++g) std::printf(" %.4f", p[g]);
  std::printf("\n");
}

int cmd_opf(const Settings& s) {
  const CasePtr c = load_case(s);
  const fs::path out = prepare_output(s);
  tscopf_result* raw = nullptr;
  const tscopf_status st = tscopf_solve_opf(c.get(), &s.solver, &raw);
  ResultPtr r(raw);
  if (st != TSCOPF_OK) throw LibraryError(st, std::string("AC-OPF: ") + tscopf_last_error());
  char* text = nullptr;
  check(tscopf_result_dispatch_json(r.get(), &text), "dispatch");
  write_file(out / "dispatch.json", take(text));
  print_dispatch(r.get());
  return exit_ok;
}

int cmd_tscopf(const Settings& s) {
  const CasePtr c = load_case(s);
  const auto ks = load_contingencies(s, true);
  const int passes = correction_passes(s);
  const fs::path out = prepare_output(s);
  if (s.dump_nlp) {
    char* text = nullptr;
    check(tscopf_nlp_dump(c.get(), ks[0].get(), &text), "NLP dump");
    write_file(out / "nlp.json", take(text));
  }
  tscopf_result* raw = nullptr;
  const tscopf_status st = tscopf_solve_tscopf(c.get(), ks[0].get(), passes, &s.solver, &raw);
  ResultPtr r(raw);
  if (r) {
    // Statistics are useful even when the solve failed.
    char* text = nullptr;
    if (tscopf_result_statistics_json(r.get(), &text) == TSCOPF_OK) write_file(out / "nlp_stats.json", take(text));
  }
  if (st != TSCOPF_OK) throw LibraryError(st, std::string("TSC-OPF: ") + tscopf_last_error());
  char* text = nullptr;
  check(tscopf_result_dispatch_json(r.get(), &text), "dispatch");
  write_file(out / "dispatch.json", take(text));
  check(tscopf_result_trajectories_csv(r.get(), &text), "trajectories");
  write_file(out / "trajectories.csv", take(text));
  print_dispatch(r.get());
  double dev[64];
  const size_t ng = std::min<size_t>(tscopf_result_max_coi_deviation(r.get(), dev, 64), 64);
  std::printf("max |delta - delta_COI| (deg) =");
  for (size_t g = 0; g < ng; ++g) std::printf(" %.3f", dev[g] * 180.0 / 3.14159265358979323846);
  std::printf("\n");
  return exit_ok;
}

int cmd_simulate(const Settings& s) {
  const CasePtr c = load_case(s);
  const auto ks = load_contingencies(s, true);
  const fs::path out = prepare_output(s);
  tscopf_result* raw = nullptr;
  if (!s.dispatch_path.empty()) {
    check(tscopf_dispatch_parse(read_file(s.dispatch_path).c_str(), &raw), s.dispatch_path);
  } else {
    const tscopf_status st = tscopf_solve_opf(c.get(), &s.solver, &raw);
    if (st != TSCOPF_OK) {
      tscopf_result_free(raw);
      throw LibraryError(st, std::string("AC-OPF: ") + tscopf_last_error());
    }
  }
  ResultPtr dispatch(raw);
  tscopf_result* sim = nullptr;
  check(tscopf_simulate(c.get(), dispatch.get(), ks[0].get(), &sim), "simulation");
  ResultPtr r(sim);
  char* text = nullptr;
  check(tscopf_result_trajectories_csv(r.get(), &text), "trajectories");
  write_file(out / "trajectories.csv", take(text));
  std::printf("%zu steps written\n", tscopf_result_trajectory_length(r.get()));
  return exit_ok;
}

struct CompareOutcome {
  tscopf_status status = TSCOPF_OK;
  std::string error;
  std::string markdown;
};

void compare_one(const tscopf_case* c, const tscopf_contingency* k, int passes, const tscopf_solver_options* solver,
                 const fs::path& dir, CompareOutcome& result) {
  tscopf_report* raw = nullptr;
  result.status = tscopf_compare(c, k, passes, solver, &raw);
  if (result.status != TSCOPF_OK) {
    result.error = tscopf_last_error();
    return;
  }
  ReportPtr report(raw);
  try {
    fs::create_directories(dir);
    char* text = nullptr;
    tscopf_report_json(report.get(), &text);
    write_file(dir / "report.json", take(text));
    tscopf_report_markdown(report.get(), &text);
    result.markdown = take(text);
    write_file(dir / "report.md", result.markdown);
    for (size_t g = 0; g < tscopf_report_generator_count(report.get()); ++g) {
      const std::string n = std::to_string(g + 1);
      tscopf_report_plot_svg(report.get(), g, TSCOPF_DELTA, &text);
      write_file(dir / ("delta_g" + n + ".svg"), take(text));
      tscopf_report_plot_svg(report.get(), g, TSCOPF_OMEGA, &text);
      write_file(dir / ("omega_g" + n + ".svg"), take(text));
    }
  } catch (const std::exception& e) {
    result.status = TSCOPF_ERR_IO;
    result.error = e.what();
  }
}

int cmd_compare(const Settings& s) {
  const CasePtr c = load_case(s);
  const auto ks = load_contingencies(s, false);
  const int passes = correction_passes(s);
  if (passes < 1) throw UsageError("compare needs --correction once");
  const fs::path out = prepare_output(s);

  // One worker per contingency; each writes only to its own directory.
  std::vector<CompareOutcome> results(ks.size());
  std::vector<std::thread> workers;
  for (size_t i = 0; i < ks.size(); ++i) {
    const fs::path dir = out / tscopf_contingency_id(ks[i].get());
    workers.emplace_back(compare_one, c.get(), ks[i].get(), passes, &s.solver, dir, std::ref(results[i]));
  }
  for (auto& w : workers) w.join();

  int code = exit_ok;
  for (size_t i = 0; i < ks.size(); ++i) {
    if (results[i].status == TSCOPF_OK) {
      std::printf("%s\n", results[i].markdown.c_str());
    } else {
      std::fprintf(stderr, "error: %s: %s\n", tscopf_contingency_id(ks[i].get()), results[i].error.c_str());
      code = std::max(code, exit_code(results[i].status));
    }
  }
  return code;
}

int cmd_reduce(const Settings& s) {
  const CasePtr c = load_case(s);
  const auto ks = load_contingencies(s, true);
  const fs::path out = prepare_output(s);
  char* text = nullptr;
  check(tscopf_reduce(c.get(), ks[0].get(), &text), "reduction");
  write_file(out / "reduced_network.json", take(text));
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient stability-constrained optimal power flow"};
  app.require_subcommand(1);

  std::string config, case_path, sidecar, dt, horizon, correction, dispatch, out;
  std::vector<std::string> contingencies;
  double load_scale = 0.0;
  int correction_iters = 0, max_iterations = 0;
  bool force = false, dump_nlp = false, verbose = false;

  auto add_common = [&](CLI::App* cmd, bool needs_contingency) {
    cmd->add_option("--config", config, "Study configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--case", case_path, "Case file (.json, or .m with --dynamics)");
    cmd->add_option("--dynamics", sidecar, "Generator dynamics for a MATPOWER case");
    cmd->add_option("--load-scale", load_scale, "Multiply every load by this factor");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_flag("--force", force, "Overwrite a non-empty output directory");
    cmd->add_option("--max-iterations", max_iterations, "Solver iteration limit");
    cmd->add_flag("--verbose", verbose, "Solver iteration log on stderr");
    if (needs_contingency) {
      cmd->add_option("--contingency", contingencies, "Contingency file (JSON); repeatable for compare");
      cmd->add_option("--dt", dt, "Time step, e.g. 10ms");
      cmd->add_option("--horizon", horizon, "Simulated time, e.g. 5s");
    }
  };

  auto* opf = app.add_subcommand("opf", "AC-OPF without stability constraints");
  add_common(opf, false);
  auto* tsc = app.add_subcommand("tscopf", "Stability-constrained OPF for one contingency");
  add_common(tsc, true);
  tsc->add_option("--correction", correction, "none or once")->check(CLI::IsMember({"none", "once"}));
  tsc->add_option("--correction-iters", correction_iters, "Correction passes when --correction once");
  tsc->add_flag("--dump-nlp", dump_nlp, "Write the problem's variables and rows to nlp.json");
  auto* sim = app.add_subcommand("simulate", "Benchmark simulation of a dispatch");
  add_common(sim, true);
  sim->add_option("--dispatch", dispatch, "dispatch.json to simulate (default: the AC-OPF dispatch)");
  auto* cmp = app.add_subcommand("compare", "Load-voltage assumption study with MAE report and plots");
  add_common(cmp, true);
  cmp->add_option("--correction", correction, "none or once")->check(CLI::IsMember({"none", "once"}));
  cmp->add_option("--correction-iters", correction_iters, "Correction passes");
  auto* red = app.add_subcommand("reduce", "Write the Kron-reduced networks of a contingency");
  add_common(red, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    Settings s;
    if (!config.empty()) load_config(config, s);
    // Flags win over the config file.
    if (!case_path.empty()) s.case_path = case_path;
    if (!sidecar.empty()) s.sidecar = sidecar;
    if (load_scale > 0.0) s.load_scale = load_scale;
    if (!contingencies.empty()) s.contingencies = contingencies;
    if (!dt.empty()) s.dt = parse_seconds(dt);
    if (!horizon.empty()) s.horizon = parse_seconds(horizon);
    if (!correction.empty()) s.correction = correction;
    if (correction_iters > 0) s.correction_iters = correction_iters;
    if (!out.empty()) s.out = out;
    if (max_iterations > 0) s.solver.max_iterations = max_iterations;
    s.solver.verbose = verbose ? 1 : 0;
    s.dispatch_path = dispatch;
    s.force = force;
    s.dump_nlp = dump_nlp;

    if (*opf) return cmd_opf(s);
    if (*tsc) return cmd_tscopf(s);
    if (*sim) return cmd_simulate(s);
    if (*cmp) return cmd_compare(s);
    return cmd_reduce(s);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_usage;
  } catch (const LibraryError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_usage;
  }
}
