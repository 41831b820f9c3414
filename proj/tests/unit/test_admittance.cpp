#include <doctest.h>

#include <complex>

#include "support.hpp"
#include "tscopf/admittance.hpp"
#include "tscopf/errors.hpp"

using namespace tscopf;

namespace {

using C = std::complex<double>;

// Reference values from tests/oracles/kron_reference.py (numpy, linear solve
// on the augmented network), bundled case at 1.5x load, flat load voltages.
const C pre_fault_ref[3][3] = {
    {{1.05212075928064, -3.24659985552962}, {0.412835281562266, 1.35703152076277}, {0.307675594231633, 1.10693016850653}},
    {{0.412835281562266, 1.35703152076277}, {0.522254232983028, -2.84198707267434}, {0.288229498511825, 1.00068633096794}},
    {{0.307675594231633, 1.10693016850653}, {0.288229498511825, 1.00068633096794}, {0.336525304165897, -2.4359129493339}},
};
const C during_ref[3][3] = {
    {{7.13338126566336e-05, -8.44594594500576}, {1.89868518552961e-05, -1.82164787994608e-06}, {1.54100213747599e-05, -1.10272118653796e-06}},
    {{1.89868518552961e-05, -1.82164787994608e-06}, {0.377716207607154, -3.19264335029375}, {0.178068458895352, 0.713913660267511}},
    {{1.54100213747599e-05, -1.10272118653796e-06}, {0.178068458895352, 0.713913660267511}, {0.252947731224084, -2.67028276563357}},
};
const C post_ref[3][3] = {
    {{0.723014093726399, -2.02090321030038}, {0.20282526687646, 0.601323136623104}, {0.17902730830479, 1.03663332467587}},
    {{0.20282526687646, 0.601323136623104}, {0.825774933500267, -2.52516989576518}, {0.363859789599384, 0.992733560566867}},
    {{0.17902730830479, 1.03663332467587}, {0.363859789599384, 0.992733560566867}, {0.343080965746607, -2.44961824580195}},
};

double max_error(const Eigen::MatrixXcd& m, const C (&ref)[3][3]) {
  double e = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e = std::max(e, std::abs(m(i, j) - ref[i][j]));
  return e;
}

}  // namespace

TEST_CASE("reduced networks match the numpy reference") {
  const Case c = test::bundled();
  const auto pre = build_pre_fault_network(c, LoadVoltageAssumption::flat());
  CHECK(max_error(pre.y_red, pre_fault_ref) < 1e-12);
  const auto stages = build_stage_networks(c, test::fault_at_4(), LoadVoltageAssumption::flat());
  CHECK(stages.during.stage == NetworkStage::during_fault);
  CHECK(stages.post.stage == NetworkStage::post_fault);
  CHECK(max_error(stages.during.y_red, during_ref) < 1e-11);
  CHECK(max_error(stages.post.y_red, post_ref) < 1e-12);
  CHECK((stages.post.g_red - stages.post.y_red.real()).norm() == 0.0);
  CHECK((stages.post.b_red - stages.post.y_red.imag()).norm() == 0.0);
}

TEST_CASE("reduced networks are symmetric without phase shifters") {
  const auto stages = build_stage_networks(test::bundled(), test::fault_at_7(), LoadVoltageAssumption::flat());
  CHECK((stages.during.y_red - stages.during.y_red.transpose()).norm() < 1e-12);
  CHECK((stages.post.y_red - stages.post.y_red.transpose()).norm() < 1e-12);
}

TEST_CASE("a contingency that opens no branch keeps the pre-fault post stage") {
  const Case c = test::bundled();
  ContingencySpec k = test::fault_at_4();
  k.cleared_branch.reset();
  const auto stages = build_stage_networks(c, k, LoadVoltageAssumption::flat());
  const auto pre = build_pre_fault_network(c, LoadVoltageAssumption::flat());
  CHECK((stages.post.y_red - pre.y_red).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("load admittance conversion") {
  CHECK(load_to_admittance(1.25, 0.5, 1.0) == C(1.25, -0.5));
  const C y = load_to_admittance(1.25, 0.5, 1.1);
  CHECK(y.real() == doctest::Approx(1.25 / 1.21));
  CHECK(y.imag() == doctest::Approx(-0.5 / 1.21));
  // At its own voltage the admittance draws the scheduled power.
  const C s = std::conj(y) * 1.1 * 1.1;
  CHECK(s.real() == doctest::Approx(1.25));
  CHECK(s.imag() == doctest::Approx(0.5));
}

TEST_CASE("voltage-dependent load admittances change the reduced network") {
  const Case c = test::bundled();
  std::vector<double> v(c.bus_count(), 1.0);
  const auto flat = build_pre_fault_network(c, LoadVoltageAssumption::flat());
  const auto same = build_pre_fault_network(c, LoadVoltageAssumption::from_voltages(v));
  CHECK((flat.y_red - same.y_red).cwiseAbs().maxCoeff() < 1e-15);
  v[c.bus_index(5)] = 1.05;
  const auto moved = build_pre_fault_network(c, LoadVoltageAssumption::from_voltages(v));
  CHECK((flat.y_red - moved.y_red).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("Ybus, fault shunt and branch removal") {
  const Case c = test::bundled();
  const auto y = build_ybus(c);
  CHECK(y.n() == 9);
  // Row sums are the shunt admittances (line charging only here).
  const std::size_t i4 = c.bus_index(4);
  C row{};
  for (std::size_t j = 0; j < 9; ++j) row += y(i4, j);
  CHECK(row.real() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(row.imag() == doctest::Approx((0.158 + 0.176) / 2));

  const auto f = apply_fault(y, i4);
  CHECK(f(i4, i4) - y(i4, i4) == C(1e6, 0.0));

  const Case cut = remove_branch(c, 5, 4);
  CHECK(cut.branches.size() == 8);
  CHECK_THROWS_AS(remove_branch(c, 1, 9), IndexError);

  ContingencySpec k = test::fault_at_4();
  k.fault_bus = 77;
  CHECK_THROWS(build_stage_networks(c, k, LoadVoltageAssumption::flat()));
}
