#include <doctest.h>

#include <cmath>
#include <complex>

#include "support.hpp"
#include "tscopf/admittance.hpp"
#include "tscopf/opf_steady.hpp"
#include "tscopf/power_flow.hpp"

using namespace tscopf;

namespace {

// tests/oracles/acopf_reference.py (scipy SLSQP on the same data).
constexpr double reference_objective = 10133.7139796794;

}  // namespace

TEST_CASE("AC-OPF reaches the reference optimum") {
  const Case c = test::bundled();
  const OpfResult r = solve_opf(c);
  REQUIRE(r.report.status == nlp::SolveStatus::optimal);
  CHECK(std::abs(r.dispatch.objective - reference_objective) / reference_objective < 1e-8);
  const double p_ref[3] = {1.43083712, 1.98249997, 1.38908354};
  const double q_ref[3] = {0.55321241, 0.35518063, 0.12741019};
  for (std::size_t g = 0; g < 3; ++g) {
    CHECK(r.dispatch.p[g] == doctest::Approx(p_ref[g]).epsilon(1e-5));
    CHECK(r.dispatch.q[g] == doctest::Approx(q_ref[g]).epsilon(1e-4));
  }
}

TEST_CASE("AC-OPF dispatch balances load plus losses") {
  const Case c = test::bundled();
  const OpfResult r = solve_opf(c);
  const auto y = build_ybus(c);
  const auto& d = r.dispatch;
  std::vector<std::complex<double>> v(c.bus_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(d.v[i], d.theta[i]);
  // Losses: total injected complex power into the network.
  double losses = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::complex<double> current{};
    for (std::size_t j = 0; j < v.size(); ++j) current += y(i, j) * v[j];
    losses += (v[i] * std::conj(current)).real();
  }
  double generation = 0.0, load = 0.0;
  for (double p : d.p) generation += p;
  for (const auto& l : c.loads) load += l.p;
  CHECK(losses > 0.0);
  CHECK(generation == doctest::Approx(load + losses).epsilon(1e-8));
  CHECK(d.theta[c.slack_index()] == 0.0);
  for (std::size_t i = 0; i < d.v.size(); ++i) {
    CHECK(d.v[i] <= c.buses[i].v_max + 1e-7);
    CHECK(d.v[i] >= c.buses[i].v_min - 1e-7);
  }
}

TEST_CASE("internal machine state matches the terminal phasor relation") {
  const Case c = test::bundled();
  const OpfResult r = solve_opf(c);
  const auto& d = r.dispatch;
  REQUIRE(d.e.size() == 3);
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t b = c.bus_index(c.generators[g].bus);
    const std::complex<double> vt = std::polar(d.v[b], d.theta[b]);
    const std::complex<double> eg = std::polar(d.e[g], d.delta0[g]);
    const std::complex<double> i = (eg - vt) / std::complex<double>(0.0, c.generators[g].x_d_prime);
    const std::complex<double> s = vt * std::conj(i);
    CHECK(s.real() == doctest::Approx(d.p[g]).epsilon(1e-10));
    CHECK(s.imag() == doctest::Approx(d.q[g]).epsilon(1e-10));
  }
}

TEST_CASE("solving with internal state gives the same optimum") {
  const Case c = test::bundled();
  OpfOptions o;
  o.internal_state = true;
  const OpfResult with = solve_opf(c, o);
  const OpfResult without = solve_opf(c);
  REQUIRE(with.report.status == nlp::SolveStatus::optimal);
  CHECK(with.dispatch.objective == doctest::Approx(without.dispatch.objective).epsilon(1e-7));
}

TEST_CASE("load beyond capacity is not reported as solved") {
  const Case c = test::bundled(10.0);
  const OpfResult r = solve_opf(c);
  CHECK(r.report.status != nlp::SolveStatus::optimal);
  CHECK(r.report.status != nlp::SolveStatus::acceptable);
  CHECK_FALSE(r.report.worst_block.empty());
}

TEST_CASE("power flow polishes an optimizer dispatch") {
  const Case c = test::bundled();
  const OpfResult r = solve_opf(c);
  const PowerFlowResult pf = solve_power_flow(c, r.dispatch);
  CHECK(pf.mismatch < 1e-12);
  for (std::size_t g = 1; g < 3; ++g) CHECK(pf.dispatch.p[g] == r.dispatch.p[g]);
  for (std::size_t i = 0; i < c.bus_count(); ++i) CHECK(pf.dispatch.v[i] == doctest::Approx(r.dispatch.v[i]).epsilon(1e-6));
}

TEST_CASE("branch flow at both ends of a lossless transformer") {
  Branch br;
  br.from = 1;
  br.to = 4;
  br.x = 0.0576;
  const BranchFlow a = branch_flow(br, 1.1, 1.08, 0.1, 0.0, false);
  const BranchFlow b = branch_flow(br, 1.1, 1.08, 0.1, 0.0, true);
  CHECK(a.p + b.p == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a.p == doctest::Approx(1.1 * 1.08 * std::sin(0.1) / 0.0576));
}
