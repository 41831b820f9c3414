#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tscopf/admittance.hpp"
#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"
#include "tscopf/opf_steady.hpp"

namespace tscopf {

enum class TrajectorySource { optimizer, simulator };

const char* to_string(TrajectorySource source);

/// Rotor angle (rad) and speed deviation (p.u.) series on a shared time axis.
struct TrajectorySet {
  std::vector<double> times;
  std::vector<std::vector<double>> delta;  // [g][t]
  std::vector<std::vector<double>> omega;  // [g][t]
  double dt = 0.0;
  std::string contingency_id;
  TrajectorySource source = TrajectorySource::simulator;
  std::string correction;  // "none", "once", "benchmark", ...

  std::size_t generator_count() const { return delta.size(); }
  std::size_t size() const { return times.size(); }
  /// Angles relative to the inertia-weighted centre, in radians.
  std::vector<std::vector<double>> coi_relative_delta(const std::vector<double>& inertia) const;
};

/// Linear interpolation of every series onto `times`. Times outside the
/// source range are clamped to the end values.
TrajectorySet resample(const TrajectorySet& source, const std::vector<double>& times);

/// How the step that spans the clearing instant is integrated.
///
/// shared_step: P_ele at the clearing step is evaluated once, on the
/// during-fault network, and reused as the left end of the next step. This
/// is exactly the discretisation inside the optimisation model.
///
/// split_at_event: the state at the clearing instant is kept, but the next
/// step starts from P_ele re-evaluated on the post-fault network, the usual
/// treatment of a network switching event in time-domain simulators.
enum class EventTreatment { shared_step, split_at_event };

struct SimulationOptions {
  EventTreatment event = EventTreatment::shared_step;
  double newton_tolerance = 1e-12;
  int max_newton_iterations = 50;
};

/// Integrates the classical-model swing equations on the Kron-reduced
/// networks with the trapezoidal rule, one Newton solve per step.
/// Throws IntegrationError on Newton failure.
TrajectorySet simulate(const Case& c, const DispatchSolution& dispatch, const ContingencySpec& contingency,
                       const LoadVoltageAssumption& assumption, const SimulationOptions& options = {});

/// Same integration with explicit networks and initial machine state.
TrajectorySet simulate_networks(const Case& c, const StageNetworks& networks, const std::vector<double>& e,
                                const std::vector<double>& delta0, const std::vector<double>& pmec,
                                const ContingencySpec& contingency, const SimulationOptions& options = {});

struct RefinementResult {
  double order = 0.0;
  bool finite = false;
  double coarse_difference = 0.0;  // max |y_h - y_h/2| on the window
  double fine_difference = 0.0;    // max |y_h/2 - y_h/4|
  std::string explanation;
};

/// Observed convergence order from three runs at dt, dt/2 and dt/4, using
/// COI-relative angles and speed deviations sampled on the coarse grid
/// points inside [t_begin, t_end]. Throws DomainError for mismatched runs.
RefinementResult refine_check(const TrajectorySet& coarse, const TrajectorySet& half, const TrajectorySet& quarter,
                              const std::vector<double>& inertia, double t_begin, double t_end);

}  // namespace tscopf
