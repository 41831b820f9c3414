#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "tscopf/admittance.hpp"
#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"
#include "tscopf/nlp.hpp"
#include "tscopf/opf_steady.hpp"
#include "tscopf/swing_dynamics.hpp"
#include "tscopf/tdsim.hpp"

namespace tscopf {

/// A fully assembled TSC-OPF nonlinear program.
struct TscopfModel {
  std::unique_ptr<nlp::NlpProblem> problem;
  SteadyIndex steady;
  DynamicIndex dynamic;
  TimeGrid grid;
  StageNetworks networks;
};

struct TscopfOptions {
  double delta_limit = default_delta_limit;
  /// Start trajectories, resampled onto the model grid. Flat when absent.
  std::optional<TrajectorySet> initial_trajectories;
  /// Finer grids are first solved at this step and the result is used as
  /// the start point. Zero disables the pre-solve.
  double coarse_start_dt = 0.01;
  nlp::SolverOptions solver = default_solver_options();

  /// Tighter feasibility than the generic default so that the returned
  /// trajectories agree with an independent simulation to ~1e-8.
  static nlp::SolverOptions default_solver_options() {
    nlp::SolverOptions o;
    o.tol_kkt = 1e-8;
    o.tol_feas = 1e-13;
    // Late-horizon angle peaks react strongly to the dispatch, which makes
    // fine-grid solves take many short steps.
    o.max_iterations = 3000;
    return o;
  }
};

/// Builds the problem for one contingency. Start values come from `start`
/// (typically the plain AC-OPF dispatch) and, if given, `trajectories`;
/// otherwise the trajectories start flat.
TscopfModel build_tscopf_model(const Case& c, const ContingencySpec& contingency,
                               const LoadVoltageAssumption& assumption, const DispatchSolution& start,
                               double delta_limit = default_delta_limit,
                               const TrajectorySet* trajectories = nullptr);

struct TscopfResult {
  DispatchSolution dispatch;
  TrajectorySet trajectories;
  nlp::SolveReport report;
  std::size_t variables = 0;
  std::size_t constraints = 0;
  /// Largest |delta_g - delta_COI| over the horizon, per generator (rad).
  std::vector<double> max_coi_deviation;
};

TscopfResult solve_tscopf(const Case& c, const ContingencySpec& contingency, const LoadVoltageAssumption& assumption,
                          const DispatchSolution& start, const TscopfOptions& options = {});

/// Optimizer trajectories from a solution vector.
TrajectorySet extract_trajectories(const TscopfModel& model, std::span<const double> x,
                                   const std::string& contingency_id);

}  // namespace tscopf
