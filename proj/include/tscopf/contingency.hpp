#pragma once

#include <optional>
#include <string>
#include <utility>

namespace tscopf {

/// A three-phase fault at `fault_bus` starting at t = 0, cleared at
/// `clearing_time` by opening `cleared_branch` (if any).
struct ContingencySpec {
  std::string id = "contingency";
  int fault_bus = 0;
  std::optional<std::pair<int, int>> cleared_branch;
  double clearing_time = 0.0;
  double dt = 0.01;
  double horizon = 5.0;
  /// Shunt added at the faulted bus during the fault (p.u.); 0 means no fault.
  double fault_shunt = 1e6;
};

/// Checks the contingency's own invariants: dt > 0, clearing_time < horizon,
/// both grid-aligned to dt. Throws DomainError.
void validate(const ContingencySpec& c);

/// Number of dt steps in `duration`, or nullopt when duration is not an
/// integer multiple of dt (relative tolerance 1e-9).
std::optional<long> aligned_steps(double duration, double dt);

}  // namespace tscopf
