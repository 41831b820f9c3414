#pragma once

#include "tscopf/case_model.hpp"
#include "tscopf/opf_steady.hpp"

namespace tscopf {

struct PowerFlowResult {
  DispatchSolution dispatch;
  int iterations = 0;
  double mismatch = 0.0;
};

/// Newton-Raphson power flow that keeps the start point's generator active
/// powers (except the slack's) and generator-bus voltage magnitudes, and
/// solves for the remaining angles and load-bus magnitudes. Used to polish
/// an optimizer dispatch to round-off level before an equilibrium
/// simulation. Throws DomainError if the mismatch does not fall below `tol`.
PowerFlowResult solve_power_flow(const Case& c, const DispatchSolution& start, double tol = 1e-13,
                                 int max_iterations = 30);

}  // namespace tscopf
