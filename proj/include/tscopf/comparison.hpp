#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"
#include "tscopf/metrics.hpp"
#include "tscopf/nlp.hpp"
#include "tscopf/opf_steady.hpp"
#include "tscopf/svg_plot.hpp"
#include "tscopf/tdsim.hpp"
#include "tscopf/tscopf.hpp"

namespace tscopf {

struct ComparisonOptions {
  double coarse_dt = 0.01;
  double fine_dt = 0.001;
  double benchmark_dt = 0.001;
  /// Number of voltage-correction passes in Step 3. One is the standard
  /// study; more passes iterate towards a fixed point.
  int correction_iterations = 1;
  AngleReference angle_reference = AngleReference::coi;
  EventTreatment benchmark_event = EventTreatment::split_at_event;
  OpfOptions opf;
  TscopfOptions tscopf;
};

/// One solved optimisation step.
struct StageSummary {
  std::string label;  // "step1", "step2", "step3"
  double dt = 0.0;    // 0 for the AC-OPF
  DispatchSolution dispatch;
  nlp::SolveStatus status = nlp::SolveStatus::optimal;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::string message;
};

/// One column of the MAE table.
struct ComparisonVariant {
  std::string label;       // "w/o correction", "w correction", "benchmark"
  std::string correction;  // "none", "once" (or "xN"), "benchmark"
  double dt = 0.0;
  TrajectorySet trajectories;
  std::vector<double> mae_delta;  // degrees
  std::vector<double> mae_omega;  // p.u.
};

struct ComparisonReport {
  std::string contingency_id;
  std::size_t generator_count = 0;
  AngleReference angle_reference = AngleReference::coi;
  double benchmark_dt = 0.0;
  std::vector<double> inertia;
  std::vector<StageSummary> stages;
  /// Table order: w/o coarse, w/o fine, w coarse, w fine, benchmark coarse.
  std::vector<ComparisonVariant> variants;
  TrajectorySet benchmark;

  const StageSummary& stage(const std::string& label, double dt) const;
  const ComparisonVariant& variant(const std::string& label, double dt) const;
};

/// Steps 1 to 5 of the comparison procedure: AC-OPF; TSC-OPF with flat load
/// voltages; TSC-OPF with load admittances from the Step-2 voltages; a
/// benchmark simulation from the fine-step Step-3 point; MAEs of every
/// variant against the benchmark. Failures raise StageError naming the step.
ComparisonReport run_comparison(const Case& c, const ContingencySpec& contingency,
                                const ComparisonOptions& options = {});

std::string report_json(const ComparisonReport& report);
/// MAE table per generator and quantity, followed by a step summary.
std::string report_markdown(const ComparisonReport& report);

/// One generator's delta (in degrees, using the report's angle reference)
/// or speed deviation for every variant plus the benchmark.
PlotSpec comparison_plot(const ComparisonReport& report, std::size_t generator, Quantity quantity);

}  // namespace tscopf
