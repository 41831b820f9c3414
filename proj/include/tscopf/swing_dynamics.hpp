#pragma once

#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

#include "tscopf/admittance.hpp"
#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"
#include "tscopf/nlp.hpp"
#include "tscopf/opf_steady.hpp"

namespace tscopf {

inline constexpr double default_delta_limit = 100.0 * std::numbers::pi / 180.0;

/// Uniform time grid t = 0, dt, ..., steps*dt. Step t uses the during-fault
/// network iff clearing_time > 0 and t*dt <= clearing_time.
struct TimeGrid {
  double dt = 0.01;
  double clearing_time = 0.0;
  double horizon = 5.0;
  long steps = 0;           // number of dt intervals
  long clearing_step = 0;   // clearing_time / dt

  NetworkStage stage_of(long t) const {
    return clearing_step > 0 && t <= clearing_step ? NetworkStage::during_fault : NetworkStage::post_fault;
  }
  double time(long t) const { return static_cast<double>(t) * dt; }
};

/// Validates the contingency (grid alignment included) and builds its grid.
TimeGrid make_grid(const ContingencySpec& contingency);

/// Positions of the dynamic variables; per-step series have steps + 1 entries.
struct DynamicIndex {
  std::vector<std::vector<std::size_t>> delta;   // [g][t]
  std::vector<std::vector<std::size_t>> domega;  // [g][t]
  std::vector<std::vector<std::size_t>> pele;    // [g][t]
  std::vector<std::size_t> pmec;                 // [g]
  std::vector<std::size_t> coi;                  // [t]
};

DynamicIndex add_dynamic_variables(nlp::NlpProblem& problem, const Case& c, const TimeGrid& grid);

/// Flat start: every delta at `delta0`, domega = 0, P_ele = P_mec = `p`.
void flat_dynamic_start(nlp::NlpProblem& problem, const Case& c, const DynamicIndex& idx, const TimeGrid& grid,
                        const std::vector<double>& delta0, const std::vector<double>& p);

/// Trapezoidal angle and speed equations for t = 1..steps (two blocks).
std::vector<std::unique_ptr<nlp::ConstraintBlock>> build_trapezoidal_swing(const Case& c, const TimeGrid& grid,
                                                                           const DynamicIndex& idx);

/// P_ele,g^t = E_g sum_i E_i (G_gi cos(d_g - d_i) + B_gi sin(d_g - d_i)) with
/// the network of stage_of(t), for t = 0..steps.
std::unique_ptr<nlp::ConstraintBlock> build_electrical_power(const Case& c, const StageNetworks& networks,
                                                             const TimeGrid& grid, const DynamicIndex& idx,
                                                             const std::vector<std::size_t>& e_vars);

/// COI definition (equality) and |delta_g - delta_COI| <= limit (inequality).
std::vector<std::unique_ptr<nlp::ConstraintBlock>> build_coi_constraints(const Case& c, const TimeGrid& grid,
                                                                         const DynamicIndex& idx,
                                                                         double delta_limit);

/// delta_g at step 0 = delta0_g, domega_g at step 0 = domega0_g, P_mec,g = P_g.
std::unique_ptr<nlp::ConstraintBlock> link_initial_conditions(const SteadyIndex& steady, const DynamicIndex& idx);

/// Electrical power of every machine for given internal voltages and angles.
std::vector<double> electrical_power(const ReducedNetwork& net, const std::vector<double>& e,
                                     const std::vector<double>& delta);

}  // namespace tscopf
