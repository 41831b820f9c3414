#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tscopf/case_model.hpp"
#include "tscopf/errors.hpp"
#include "tscopf/io.hpp"

using namespace tscopf;

TEST_CASE("bundled case has the expected shape") {
  const Case c = parse_case(test::data("wecc9.json"));
  CHECK(c.bus_count() == 9);
  CHECK(c.branches.size() == 9);
  CHECK(c.generator_count() == 3);
  CHECK(c.loads.size() == 3);
  CHECK(c.buses[c.slack_index()].id == 1);
  CHECK(c.bus_index(8) == 7);
  CHECK_THROWS_AS(c.bus_index(42), IndexError);
}

TEST_CASE("MATPOWER import matches the bundled case field by field") {
  const Case json_case = parse_case(test::data("wecc9.json"));
  Case m = import_matpower(test::data("wecc9.m"), test::data("wecc9_dynamics.json"));
  // The MATPOWER format carries no system frequency.
  CHECK(m.omega_syn == doctest::Approx(default_omega_syn));
  m.omega_syn = json_case.omega_syn;

  REQUIRE(m.bus_count() == json_case.bus_count());
  for (std::size_t i = 0; i < m.buses.size(); ++i) {
    const auto &a = m.buses[i], &b = json_case.buses[i];
    CHECK(a.id == b.id);
    CHECK(a.v_min == b.v_min);
    CHECK(a.v_max == b.v_max);
    CHECK(a.shunt_g == b.shunt_g);
    CHECK(a.shunt_b == b.shunt_b);
    CHECK(a.is_slack == b.is_slack);
  }
  REQUIRE(m.branches.size() == json_case.branches.size());
  for (std::size_t i = 0; i < m.branches.size(); ++i) {
    const auto &a = m.branches[i], &b = json_case.branches[i];
    CHECK(a.from == b.from);
    CHECK(a.to == b.to);
    CHECK(a.r == doctest::Approx(b.r).epsilon(1e-15));
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-15));
    CHECK(a.b_charging == doctest::Approx(b.b_charging).epsilon(1e-15));
    CHECK(a.tap == b.tap);
    CHECK(a.s_max == doctest::Approx(b.s_max).epsilon(1e-15));
    CHECK(a.theta_diff_min == doctest::Approx(b.theta_diff_min).epsilon(1e-15));
    CHECK(a.theta_diff_max == doctest::Approx(b.theta_diff_max).epsilon(1e-15));
  }
  REQUIRE(m.generator_count() == json_case.generator_count());
  for (std::size_t i = 0; i < m.generators.size(); ++i) {
    const auto &a = m.generators[i], &b = json_case.generators[i];
    CHECK(a.bus == b.bus);
    CHECK(a.p_min == doctest::Approx(b.p_min).epsilon(1e-15));
    CHECK(a.p_max == doctest::Approx(b.p_max).epsilon(1e-15));
    CHECK(a.q_min == doctest::Approx(b.q_min).epsilon(1e-15));
    CHECK(a.q_max == doctest::Approx(b.q_max).epsilon(1e-15));
    CHECK(a.cost == doctest::Approx(b.cost).epsilon(1e-13));
    CHECK(a.cost_quadratic == doctest::Approx(b.cost_quadratic).epsilon(1e-13));
    CHECK(a.cost_constant == doctest::Approx(b.cost_constant).epsilon(1e-13));
    CHECK(a.x_d_prime == b.x_d_prime);
    CHECK(a.h == b.h);
    CHECK(a.d == b.d);
  }
  REQUIRE(m.loads.size() == json_case.loads.size());
  for (std::size_t i = 0; i < m.loads.size(); ++i) {
    CHECK(m.loads[i].bus == json_case.loads[i].bus);
    CHECK(m.loads[i].p == doctest::Approx(json_case.loads[i].p).epsilon(1e-15));
    CHECK(m.loads[i].q == doctest::Approx(json_case.loads[i].q).epsilon(1e-15));
  }
}

TEST_CASE("case JSON round-trips exactly") {
  const Case c = test::bundled();
  const Case back = parse_case_text(serialize_case(c));
  CHECK(serialize_case(back) == serialize_case(c));
  CHECK(back.loads[0].p == c.loads[0].p);
}

TEST_CASE("scale_loads multiplies p and q and rejects non-positive factors") {
  const Case base = parse_case(test::data("wecc9.json"));
  const Case s = scale_loads(base, 1.5);
  for (std::size_t i = 0; i < base.loads.size(); ++i) {
    CHECK(s.loads[i].p == doctest::Approx(1.5 * base.loads[i].p));
    CHECK(s.loads[i].q == doctest::Approx(1.5 * base.loads[i].q));
  }
  CHECK_THROWS_AS(scale_loads(base, 0.0), DomainError);
  CHECK_THROWS_AS(scale_loads(base, -1.0), DomainError);
}

TEST_CASE("validation names the offending field") {
  const Case good = parse_case(test::data("wecc9.json"));
  auto message = [](const Case& c) {
    try {
      validate(c);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };

  Case c = good;
  c.buses[3].id = 2;
  CHECK(message(c).find("buses[3].id") != std::string::npos);

  c = good;
  c.branches[2].r = 0.0;
  c.branches[2].x = 0.0;
  CHECK(message(c).find("branches[2].x") != std::string::npos);

  c = good;
  c.generators[1].h = 0.0;
  CHECK(message(c).find("generators[1].h") != std::string::npos);

  c = good;
  c.buses[1].is_slack = true;
  CHECK(message(c).find("is_slack") != std::string::npos);

  c = good;
  c.loads[0].bus = 99;
  CHECK(message(c).find("loads[0].bus") != std::string::npos);

  CHECK(message(good).empty());
}

TEST_CASE("malformed case text reports a parse error with a line number") {
  try {
    parse_case_text("{\n  \"base_mva\": 100,\n  \"buses\": [,]\n}", "bad.json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.json:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_case_text("{\"base_mva\": 100}"), ParseError);
  CHECK_THROWS_AS(parse_case(test::data("does_not_exist.json")), IoError);
}

TEST_CASE("MATPOWER features outside the model are rejected") {
  const std::string side = read_text_file(test::data("wecc9_dynamics.json"));
  std::string text = read_text_file(test::data("wecc9.m"));

  SUBCASE("piecewise-linear cost") {
    const auto pos = text.find("mpc.gencost = [");
    REQUIRE(pos != std::string::npos);
    const auto row = text.find("\t2\t", pos);
    text.replace(row, 3, "\t1\t");
    CHECK_THROWS_AS(import_matpower_text(text, side), UnsupportedFeatureError);
  }
  SUBCASE("missing dynamics for a generator") {
    CHECK_THROWS_AS(import_matpower_text(text, "[{\"gen_index\": 1, \"x_d_prime\": 0.06, \"h\": 23.64, \"d\": 0}]"),
                    ValidationError);
  }
}

TEST_CASE("contingency validation enforces grid alignment") {
  ContingencySpec k = test::fault_at_4();
  CHECK_NOTHROW(validate(k));
  k.dt = 0.007;
  CHECK_THROWS_AS(validate(k), DomainError);
  k.dt = 0.001;
  CHECK_NOTHROW(validate(k));
  k.clearing_time = 5.0;
  CHECK_THROWS_AS(validate(k), DomainError);
  CHECK(aligned_steps(0.15, 0.01).value() == 15);
  CHECK_FALSE(aligned_steps(0.15, 0.007).has_value());
}
