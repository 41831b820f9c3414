#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tscopf/admittance.hpp"
#include "tscopf/errors.hpp"
#include "tscopf/io.hpp"
#include "tscopf/power_flow.hpp"
#include "tscopf/swing_dynamics.hpp"
#include "tscopf/tdsim.hpp"
#include "tscopf/tscopf.hpp"

using namespace tscopf;

TEST_CASE("time grid stages and alignment") {
  ContingencySpec k = test::fault_at_4();
  const TimeGrid g = make_grid(k);
  CHECK(g.steps == 500);
  CHECK(g.clearing_step == 15);
  CHECK(g.stage_of(0) == NetworkStage::during_fault);
  CHECK(g.stage_of(15) == NetworkStage::during_fault);
  CHECK(g.stage_of(16) == NetworkStage::post_fault);
  k.clearing_time = 0.0;
  CHECK(make_grid(k).stage_of(0) == NetworkStage::post_fault);
  k.dt = 0.007;
  CHECK_THROWS_AS(make_grid(k), DomainError);
}

TEST_CASE("electrical power of the pre-fault network equals the dispatch") {
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  const PowerFlowResult pf = solve_power_flow(c, opf.dispatch);
  const auto net = build_pre_fault_network(c, LoadVoltageAssumption::from_voltages(pf.dispatch.v));
  const auto pe = electrical_power(net, pf.dispatch.e, pf.dispatch.delta0);
  for (std::size_t g = 0; g < 3; ++g) CHECK(pe[g] == doctest::Approx(pf.dispatch.p[g]).epsilon(1e-11));
}

TEST_CASE("simulator matches an independent integrator") {
  // Rotor angles (rad) from tests/oracles/trajectory_reference.py for the
  // AC-OPF dispatch, flat load voltages, 10 ms steps.
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  const TrajectorySet t = simulate(c, opf.dispatch, test::fault_at_4(), LoadVoltageAssumption::flat());
  REQUIRE(t.size() == 501);
  const double ref[3][3] = {{0.176786627814, 0.644080473046, 0.756997239748},
                            {3.516772135669, 3.442456890722, 3.227653045435},
                            {41.163730689451, 41.300651244935, 41.167524926091}};
  const std::size_t steps[3] = {15, 100, 500};
  // The reference starts from the dispatch rounded to 17 digits in JSON, and
  // the optimizer tolerance leaves ~1e-9 in the initial state.
  for (int s = 0; s < 3; ++s)
    for (std::size_t g = 0; g < 3; ++g) CHECK(t.delta[g][steps[s]] == doctest::Approx(ref[s][g]).epsilon(1e-7));
}

TEST_CASE("COI-relative angles are inertia weighted") {
  TrajectorySet t;
  t.times = {0.0, 0.01};
  t.delta = {{1.0, 2.0}, {3.0, 2.0}};
  t.omega = {{0.0, 0.0}, {0.0, 0.0}};
  const auto rel = t.coi_relative_delta({3.0, 1.0});
  CHECK(rel[0][0] == doctest::Approx(-0.5));
  CHECK(rel[1][0] == doctest::Approx(1.5));
  CHECK(rel[0][1] == doctest::Approx(0.0));
  CHECK(3.0 * rel[0][1] + rel[1][1] == doctest::Approx(0.0));
}

TEST_CASE("trapezoidal rule is second order after the event") {
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  std::vector<double> inertia;
  for (const auto& g : c.generators) inertia.push_back(g.h);
  SimulationOptions o;
  o.event = EventTreatment::split_at_event;
  std::vector<TrajectorySet> runs;
  for (double dt : {0.01, 0.005, 0.0025}) {
    ContingencySpec k = test::fault_at_4();
    k.dt = dt;
    k.horizon = 1.0;
    runs.push_back(simulate(c, opf.dispatch, k, LoadVoltageAssumption::flat(), o));
  }
  const RefinementResult r = refine_check(runs[0], runs[1], runs[2], inertia, 0.2, 1.0);
  CHECK(r.finite);
  CHECK(r.order == doctest::Approx(2.0).epsilon(0.1));
  CHECK_THROWS_AS(refine_check(runs[0], runs[2], runs[1], inertia, 0.2, 1.0), DomainError);
  CHECK_THROWS_AS(refine_check(runs[0], runs[1], runs[2], inertia, 3.0, 4.0), DomainError);
}

TEST_CASE("undisturbed system stays at equilibrium") {
  const Case c = test::bundled();
  const PowerFlowResult pf = solve_power_flow(c, solve_opf(c).dispatch);
  ContingencySpec k;
  k.fault_bus = 1;
  k.fault_shunt = 0.0;
  const TrajectorySet t = simulate(c, pf.dispatch, k, LoadVoltageAssumption::from_voltages(pf.dispatch.v));
  double drift = 0.0;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t s = 0; s < t.size(); ++s) drift = std::max(drift, std::abs(t.delta[g][s] - t.delta[g][0]));
  CHECK(drift < 1e-10);
}

TEST_CASE("TSC-OPF model has the expected structure") {
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  ContingencySpec k = test::fault_at_4();
  k.horizon = 1.0;
  const TscopfModel m = build_tscopf_model(c, k, LoadVoltageAssumption::flat(), opf.dispatch);
  CHECK(m.grid.steps == 100);
  CHECK(m.dynamic.delta.size() == 3);
  CHECK(m.dynamic.delta[0].size() == 101);
  CHECK(m.dynamic.coi.size() == 101);
  const auto d = nlp::check_derivatives(*m.problem, m.problem->start_point(), true);
  CHECK(d.max_relative_error < 1e-6);
  CHECK(d.hessian_max_relative_error < 1e-6);
}

TEST_CASE("optimizer trajectories agree with the simulator") {
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  const ContingencySpec k = test::fault_at_4();
  const TscopfResult r = solve_tscopf(c, k, LoadVoltageAssumption::flat(), opf.dispatch);
  REQUIRE(r.report.status == nlp::SolveStatus::optimal);
  const TrajectorySet s = simulate(c, r.dispatch, k, LoadVoltageAssumption::flat());
  REQUIRE(s.size() == r.trajectories.size());
  double dd = 0.0, dw = 0.0;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t t = 0; t < s.size(); ++t) {
      dd = std::max(dd, std::abs(s.delta[g][t] - r.trajectories.delta[g][t]));
      dw = std::max(dw, std::abs(s.omega[g][t] - r.trajectories.omega[g][t]));
    }
  CHECK(dd < 1e-6);
  CHECK(dw < 1e-8);
  // The fault at bus 4 leaves the angle limit inactive.
  for (double m : r.max_coi_deviation) CHECK(m < default_delta_limit - 0.1);
}

TEST_CASE("severe contingency activates the angle limit") {
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  const TscopfResult r = solve_tscopf(c, test::fault_at_7(), LoadVoltageAssumption::flat(), opf.dispatch);
  REQUIRE(r.report.status == nlp::SolveStatus::optimal);
  CHECK(r.max_coi_deviation[2] == doctest::Approx(default_delta_limit).epsilon(1e-6));
  CHECK(r.dispatch.objective > opf.dispatch.objective);
}
