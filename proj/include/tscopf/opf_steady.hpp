#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "tscopf/case_model.hpp"
#include "tscopf/nlp.hpp"

namespace tscopf {

/// Positions of the pre-fault variables inside an NlpProblem.
struct SteadyIndex {
  std::vector<std::size_t> v;
  std::vector<std::size_t> theta;
  std::vector<std::size_t> p;
  std::vector<std::size_t> q;
  /// Empty when the model was built without generator internal states.
  std::vector<std::size_t> e;
  std::vector<std::size_t> delta0;
  std::vector<std::size_t> domega0;

  bool has_internal_state() const { return !e.empty(); }
};

struct DispatchSolution {
  std::vector<double> v;
  std::vector<double> theta;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> e;
  std::vector<double> delta0;
  double objective = 0.0;
};

/// Adds V, theta, P, Q (and E, delta0, domega0 when requested) with their
/// bounds; the slack angle and domega0 are fixed at zero. Start values are
/// flat (V = 1, theta = 0, P and Q mid-range, E = 1).
SteadyIndex add_steady_variables(nlp::NlpProblem& problem, const Case& c, bool internal_state);

/// Sets start values from a previous solution.
void warm_start(nlp::NlpProblem& problem, const SteadyIndex& idx, const DispatchSolution& start);

/// sum_g c2 P_g^2 + c1 P_g + c0.
std::unique_ptr<nlp::ConstraintBlock> build_objective(const Case& c, const SteadyIndex& idx);

/// Active and reactive balance at every bus (two blocks, n_bus rows each).
std::vector<std::unique_ptr<nlp::ConstraintBlock>> build_power_balance(const Case& c, const SteadyIndex& idx);

/// Apparent-power limits at both ends of every rated branch and the branch
/// angle-difference box. Branches with both angle bounds at or beyond
/// +/-360 degrees get no angle rows (unconstrained by convention).
std::vector<std::unique_ptr<nlp::ConstraintBlock>> build_operating_limits(const Case& c, const SteadyIndex& idx);

/// Internal EMF and rotor angle from the terminal conditions.
std::unique_ptr<nlp::ConstraintBlock> build_generator_init(const Case& c, const SteadyIndex& idx);

/// E and delta0 from (V, theta, P, Q) in closed form:
/// E e^{j delta} = V e^{j theta} + j x'_d conj(S / (V e^{j theta})).
void generator_internal_state(const Case& c, const std::vector<double>& v, const std::vector<double>& theta,
                              const std::vector<double>& p, const std::vector<double>& q, std::vector<double>& e,
                              std::vector<double>& delta0);

/// Active and reactive branch flows at the `from` end (to_end = false) or the `to` end.
struct BranchFlow {
  double p = 0.0;
  double q = 0.0;
};
BranchFlow branch_flow(const Branch& br, double v_from, double v_to, double theta_from, double theta_to,
                       bool to_end);

DispatchSolution extract_dispatch(const Case& c, const SteadyIndex& idx, std::span<const double> x);

struct OpfOptions {
  nlp::SolverOptions solver;
  /// Include E, delta0 and their equations (they do not change the optimum
  /// unless the E bounds bind).
  bool internal_state = false;
};

struct OpfResult {
  DispatchSolution dispatch;
  nlp::SolveReport report;
};

/// Plain AC-OPF without stability constraints; the dispatch's E and delta0
/// are filled in closed form when the model omitted them.
OpfResult solve_opf(const Case& c, const OpfOptions& options = {});

}  // namespace tscopf
