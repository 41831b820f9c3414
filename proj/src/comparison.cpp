#include "tscopf/comparison.hpp"

#include <cstdio>
#include <functional>
#include <numbers>

#include <json.hpp>

#include "json_support.hpp"
#include "tscopf/errors.hpp"

namespace tscopf {

using json = nlohmann::json;

const StageSummary& ComparisonReport::stage(const std::string& label, double dt) const {
  for (auto it = stages.rbegin(); it != stages.rend(); ++it)
    if (it->label == label && std::abs(it->dt - dt) <= 1e-12) return *it;
  throw IndexError("no stage " + label + " at dt " + std::to_string(dt));
}

const ComparisonVariant& ComparisonReport::variant(const std::string& label, double dt) const {
  for (const auto& v : variants)
    if (v.label == label && std::abs(v.dt - dt) <= 1e-12) return v;
  throw IndexError("no variant " + label + " at dt " + std::to_string(dt));
}

namespace {

bool usable(nlp::SolveStatus s) { return s == nlp::SolveStatus::optimal || s == nlp::SolveStatus::acceptable; }

// Runs one step, converting library errors and unusable solver outcomes into
// StageError so the caller learns which step failed.
template <typename Result>
Result run_stage(const std::string& name, const std::function<Result()>& body) {
  Result r;
  try {
    r = body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what(), e.code());
  }
  if (!usable(r.report.status)) {
    throw StageError(name, std::string("solver returned ") + nlp::to_string(r.report.status) + ": " + r.report.message,
                     ErrorCode::stage_failure, r.report.status == nlp::SolveStatus::infeasible);
  }
  return r;
}

std::string stage_name(const std::string& label, double dt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s (dt = %g ms)", label.c_str(), dt * 1e3);
  return buf;
}

StageSummary summarize(const std::string& label, double dt, const DispatchSolution& d, const nlp::SolveReport& r) {
  return {label, dt, d, r.status, r.iterations, r.solve_seconds, r.message};
}

std::string correction_label(int passes) {
  if (passes == 1) return "once";
  return "x" + std::to_string(passes);
}

}  // namespace

ComparisonReport run_comparison(const Case& c, const ContingencySpec& contingency, const ComparisonOptions& options) {
  if (options.correction_iterations < 1) throw DomainError("correction_iterations must be at least 1");
  if (!(options.coarse_dt > 0.0) || !(options.fine_dt > 0.0) || !(options.benchmark_dt > 0.0))
    throw DomainError("time steps must be positive");

  std::vector<double> inertia;
  for (const auto& g : c.generators) inertia.push_back(g.h);

  ComparisonReport report;
  report.contingency_id = contingency.id;
  report.generator_count = c.generator_count();
  report.angle_reference = options.angle_reference;
  report.benchmark_dt = options.benchmark_dt;
  report.inertia = inertia;

  const OpfResult step1 = run_stage<OpfResult>("step1", [&] { return solve_opf(c, options.opf); });
  report.stages.push_back(summarize("step1", 0.0, step1.dispatch, step1.report));

  struct Pair {
    double dt;
    TscopfResult without;
    TscopfResult with;
  };
  std::vector<Pair> runs;
  runs.reserve(2);
  // The fine-step solves start from the coarse-step solution of the same
  // step, which is much closer than a flat or cross-step start.
  const TscopfResult* previous_step2 = nullptr;
  const TscopfResult* previous_step3 = nullptr;
  for (double dt : {options.coarse_dt, options.fine_dt}) {
    ContingencySpec spec = contingency;
    spec.dt = dt;

    TscopfOptions o2 = options.tscopf;
    DispatchSolution start = step1.dispatch;
    if (previous_step2) {
      start = previous_step2->dispatch;
      o2.initial_trajectories = previous_step2->trajectories;
    }
    TscopfResult step2 = run_stage<TscopfResult>(stage_name("step2", dt), [&] {
      return solve_tscopf(c, spec, LoadVoltageAssumption::flat(), start, o2);
    });
    report.stages.push_back(summarize("step2", dt, step2.dispatch, step2.report));

    TscopfResult step3 = step2;
    for (int pass = 0; pass < options.correction_iterations; ++pass) {
      TscopfOptions o3 = options.tscopf;
      const auto assumption = LoadVoltageAssumption::from_voltages(step3.dispatch.v);
      DispatchSolution from = step3.dispatch;
      o3.initial_trajectories = step3.trajectories;
      if (pass == 0 && previous_step3) {
        from = previous_step3->dispatch;
        o3.initial_trajectories = previous_step3->trajectories;
      }
      step3 = run_stage<TscopfResult>(stage_name("step3", dt),
                                      [&] { return solve_tscopf(c, spec, assumption, from, o3); });
      report.stages.push_back(summarize("step3", dt, step3.dispatch, step3.report));
    }
    runs.push_back({dt, std::move(step2), std::move(step3)});
    previous_step2 = &runs.back().without;
    previous_step3 = &runs.back().with;
  }

  // The benchmark runs from the fine-step corrected operating point with
  // load admittances from its own voltages.
  const DispatchSolution& final_dispatch = runs.back().with.dispatch;
  const auto actual_loads = LoadVoltageAssumption::from_voltages(final_dispatch.v);
  SimulationOptions sim;
  sim.event = options.benchmark_event;
  auto benchmark_at = [&](double dt) {
    ContingencySpec spec = contingency;
    spec.dt = dt;
    try {
      TrajectorySet t = simulate(c, final_dispatch, spec, actual_loads, sim);
      t.correction = "benchmark";
      return t;
    } catch (const Error& e) {
      throw StageError(stage_name("benchmark", dt), e.what(), e.code());
    }
  };
  report.benchmark = benchmark_at(options.benchmark_dt);
  TrajectorySet benchmark_coarse = benchmark_at(options.coarse_dt);

  const std::string corrected = correction_label(options.correction_iterations);
  auto add_variant = [&](std::string label, std::string correction, double dt, TrajectorySet traj) {
    ComparisonVariant v;
    v.label = std::move(label);
    v.correction = std::move(correction);
    v.dt = dt;
    traj.correction = v.correction;
    v.mae_delta = mae(traj, report.benchmark, Quantity::delta, options.angle_reference, inertia);
    v.mae_omega = mae(traj, report.benchmark, Quantity::omega, options.angle_reference, inertia);
    v.trajectories = std::move(traj);
    report.variants.push_back(std::move(v));
  };
  for (const auto& r : runs) add_variant("w/o correction", "none", r.dt, r.without.trajectories);
  for (const auto& r : runs) add_variant("w correction", corrected, r.dt, r.with.trajectories);
  add_variant("benchmark", "benchmark", options.coarse_dt, std::move(benchmark_coarse));
  return report;
}

std::string report_json(const ComparisonReport& report) {
  json doc;
  doc["contingency"] = report.contingency_id;
  doc["generators"] = report.generator_count;
  doc["angle_reference"] = to_string(report.angle_reference);
  doc["benchmark_dt"] = report.benchmark_dt;
  json stages = json::array();
  for (const auto& s : report.stages) {
    // Run time is omitted so that reports are reproducible byte for byte.
    stages.push_back({{"label", s.label},
                      {"dt", s.dt},
                      {"status", nlp::to_string(s.status)},
                      {"iterations", s.iterations},
                      {"objective", detail::finite_or_null(s.dispatch.objective)},
                      {"p", s.dispatch.p},
                      {"q", s.dispatch.q},
                      {"v", s.dispatch.v}});
  }
  doc["stages"] = stages;
  json variants = json::array();
  for (const auto& v : report.variants) {
    variants.push_back({{"label", v.label},
                        {"correction", v.correction},
                        {"dt", v.dt},
                        {"mae_delta_deg", v.mae_delta},
                        {"mae_omega_pu", v.mae_omega}});
  }
  doc["variants"] = variants;
  return doc.dump(2) + "\n";
}

std::string report_markdown(const ComparisonReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# MAE against the %g ms benchmark: %s\n\n", report.benchmark_dt * 1e3,
                report.contingency_id.c_str());
  out += buf;
  out += std::string("Angles are ") + (report.angle_reference == AngleReference::coi ? "COI-relative" : "absolute") +
         ", in degrees; speed deviations in p.u.\n\n";

  out += "| Generator | Quantity |";
  for (const auto& v : report.variants) {
    std::snprintf(buf, sizeof buf, " %s %g ms |", v.label.c_str(), v.dt * 1e3);
    out += buf;
  }
  out += "\n|---|---|";
  for (std::size_t i = 0; i < report.variants.size(); ++i) out += "---|";
  out += '\n';
  for (int q = 0; q < 2; ++q) {
    for (std::size_t g = 0; g < report.generator_count; ++g) {
      std::snprintf(buf, sizeof buf, "| G%zu | %s |", g + 1, q == 0 ? "delta" : "domega");
      out += buf;
      for (const auto& v : report.variants) {
        std::snprintf(buf, sizeof buf, " %.4f |", q == 0 ? v.mae_delta[g] : v.mae_omega[g]);
        out += buf;
      }
      out += '\n';
    }
  }

  out += "\n| Step | dt (ms) | Status | Iterations | Objective | P (p.u.) |\n|---|---|---|---|---|---|\n";
  for (const auto& s : report.stages) {
    std::string p;
    for (std::size_t g = 0; g < s.dispatch.p.size(); ++g) {
      std::snprintf(buf, sizeof buf, "%s%.4f", g ? ", " : "", s.dispatch.p[g]);
      p += buf;
    }
    std::snprintf(buf, sizeof buf, "| %s | %g | %s | %zu | %.4f | %s |\n", s.label.c_str(), s.dt * 1e3,
                  nlp::to_string(s.status), s.iterations, s.dispatch.objective, p.c_str());
    out += buf;
  }
  return out;
}

PlotSpec comparison_plot(const ComparisonReport& report, std::size_t generator, Quantity quantity) {
  if (generator >= report.generator_count) throw IndexError("generator index out of range");
  const bool delta = quantity == Quantity::delta;
  const bool coi = report.angle_reference == AngleReference::coi;
  PlotSpec plot;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s: G%zu %s", report.contingency_id.c_str(), generator + 1,
                delta ? (coi ? "rotor angle w.r.t. COI" : "rotor angle") : "speed deviation");
  plot.title = buf;
  plot.x_label = "time (s)";
  plot.y_label = delta ? "delta (deg)" : "domega (p.u.)";
  auto add = [&](const std::string& label, const TrajectorySet& t) {
    PlotSeries s;
    s.label = label;
    s.x = t.times;
    if (delta) {
      s.y = coi ? t.coi_relative_delta(report.inertia)[generator] : t.delta[generator];
      for (double& v : s.y) v *= 180.0 / std::numbers::pi;
    } else {
      s.y = t.omega[generator];
    }
    plot.series.push_back(std::move(s));
  };
  for (const auto& v : report.variants) {
    std::snprintf(buf, sizeof buf, "%s %g ms", v.label.c_str(), v.dt * 1e3);
    add(buf, v.trajectories);
  }
  std::snprintf(buf, sizeof buf, "benchmark %g ms", report.benchmark_dt * 1e3);
  add(buf, report.benchmark);
  return plot;
}

}  // namespace tscopf
