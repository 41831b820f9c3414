#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "support.hpp"
#include "tscopf/errors.hpp"
#include "tscopf/io.hpp"
#include "tscopf/metrics.hpp"
#include "tscopf/svg_plot.hpp"
#include "tscopf/tscopf.hpp"

using namespace tscopf;

namespace {

TrajectorySet sampled(double dt, double horizon, double (*f)(double)) {
  TrajectorySet t;
  t.dt = dt;
  t.delta.assign(1, {});
  t.omega.assign(1, {});
  const long n = std::lround(horizon / dt);
  for (long k = 0; k <= n; ++k) {
    const double time = static_cast<double>(k) * dt;
    t.times.push_back(time);
    t.delta[0].push_back(f(time));
    t.omega[0].push_back(0.01 * f(time));
  }
  return t;
}

double wave(double t) { return std::sin(2.0 * std::numbers::pi * t); }

}  // namespace

TEST_CASE("MAE of a sampled sine against its finer sampling") {
  // tests/oracles/mae_reference.py: 10 ms samples interpolated onto 1 ms.
  const double reference = 0.00020715174387783729;
  const TrajectorySet coarse = sampled(0.01, 1.0, wave);
  const TrajectorySet fine = sampled(0.001, 1.0, wave);
  const auto deg = mae(coarse, fine, Quantity::delta);
  CHECK(deg[0] == doctest::Approx(reference * 180.0 / std::numbers::pi).epsilon(1e-10));
  const auto w = mae(coarse, fine, Quantity::omega);
  CHECK(w[0] == doctest::Approx(0.01 * reference).epsilon(1e-10));
}

TEST_CASE("MAE properties") {
  const TrajectorySet a = sampled(0.01, 1.0, wave);
  const TrajectorySet b = sampled(0.001, 1.0, [](double t) { return std::cos(3.0 * t); });
  CHECK(mae(a, a, Quantity::delta)[0] == 0.0);
  CHECK(mae(a, b, Quantity::delta)[0] == doctest::Approx(mae(b, a, Quantity::delta)[0]).epsilon(1e-14));
  CHECK(mae(a, b, Quantity::delta)[0] > 0.0);

  // A common offset of every generator vanishes relative to the COI.
  TrajectorySet two = a;
  two.delta.push_back(a.delta[0]);
  two.omega.push_back(a.omega[0]);
  TrajectorySet shifted = two;
  for (auto& series : shifted.delta)
    for (double& v : series) v += 0.3;
  CHECK(mae(two, shifted, Quantity::delta, AngleReference::absolute)[0] ==
        doctest::Approx(0.3 * 180.0 / std::numbers::pi));
  CHECK(mae(two, shifted, Quantity::delta, AngleReference::coi, {2.0, 5.0})[0] == doctest::Approx(0.0).epsilon(1e-12));

  TrajectorySet late = a;
  for (double& t : late.times) t += 10.0;
  CHECK_THROWS_AS(mae(a, late, Quantity::delta), DomainError);
  CHECK_THROWS_AS(mae(a, two, Quantity::delta), DomainError);
}

TEST_CASE("resampling interpolates and clamps") {
  const TrajectorySet a = sampled(0.5, 1.0, [](double t) { return 2.0 * t; });
  const TrajectorySet r = resample(a, {-1.0, 0.25, 0.75, 2.0});
  CHECK(r.delta[0][0] == 0.0);
  CHECK(r.delta[0][1] == doctest::Approx(0.5));
  CHECK(r.delta[0][2] == doctest::Approx(1.5));
  CHECK(r.delta[0][3] == doctest::Approx(2.0));
}

TEST_CASE("trajectory CSV round-trips exactly") {
  TrajectorySet t = sampled(0.01, 0.1, wave);
  t.delta.push_back(t.delta[0]);
  t.omega.push_back(t.omega[0]);
  t.delta[1][3] = 1.0 / 3.0;
  const std::string csv = trajectories_csv(t);
  CHECK(csv.rfind("t,delta_g1,delta_g2,omega_g1,omega_g2\n", 0) == 0);
  const TrajectorySet back = parse_trajectories_csv(csv);
  CHECK(back.times == t.times);
  CHECK(back.delta == t.delta);
  CHECK(back.omega == t.omega);
  CHECK(back.dt == doctest::Approx(0.01));
  CHECK(trajectories_csv(back) == csv);
}

TEST_CASE("malformed CSV is rejected with a line number") {
  try {
    parse_trajectories_csv("t,delta_g1,omega_g1\n0,1,2\n0.01,x,3\n", "traj.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("traj.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_trajectories_csv("t,delta_g1,omega_g1\n0,1,2\n0,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectories_csv("time,a\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectories_csv("t,delta_g1,omega_g1\n0,1\n"), ParseError);
}

TEST_CASE("dispatch and contingency JSON round-trip") {
  const Case c = test::bundled();
  const OpfResult r = solve_opf(c);
  const std::string text = dispatch_json(c, r.dispatch);
  const DispatchSolution back = parse_dispatch_json(text);
  CHECK(back.p == r.dispatch.p);
  CHECK(back.v == r.dispatch.v);
  CHECK(back.e == r.dispatch.e);
  CHECK(back.objective == r.dispatch.objective);
  CHECK(dispatch_json(c, back) == text);

  const ContingencySpec k = test::fault_at_7();
  const ContingencySpec k2 = parse_contingency_json(contingency_json(k));
  CHECK(k2.id == k.id);
  CHECK(k2.fault_bus == 7);
  CHECK(k2.cleared_branch == k.cleared_branch);
  CHECK(k2.clearing_time == k.clearing_time);

  const ContingencySpec minimal = parse_contingency_json("{\"fault_bus\": 4}");
  CHECK_FALSE(minimal.cleared_branch.has_value());
  CHECK(minimal.dt == 0.01);
  CHECK_THROWS_AS(parse_contingency_json("{\"fault_bus\": 4, \"cleared_branch\": [4]}"), ParseError);
  CHECK_THROWS_AS(parse_contingency_json("{\"clearing_time\": 0.1}"), ParseError);
}

TEST_CASE("bundled contingency files parse") {
  const ContingencySpec k1 = parse_contingency_json(read_text_file(test::data("contingency1.json")));
  CHECK(k1.fault_bus == 4);
  CHECK(k1.clearing_time == 0.15);
  const ContingencySpec k2 = parse_contingency_json(read_text_file(test::data("contingency2.json")));
  CHECK(k2.cleared_branch == std::make_pair(7, 5));
  CHECK(k2.clearing_time == 0.3);
}

TEST_CASE("file writes replace the target and report failures") {
  const auto dir = std::filesystem::temp_directory_path() / "tscopf_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.txt";
  write_text_file(path, "one");
  write_text_file(path, "two");
  CHECK(read_text_file(path) == "two");
  CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  CHECK_THROWS_AS(write_text_file(dir / "missing" / "b.txt", "x"), IoError);
  CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("NLP statistics omit timing and are reproducible") {
  const Case c = test::bundled();
  const OpfResult opf = solve_opf(c);
  ContingencySpec k = test::fault_at_4();
  k.horizon = 0.5;
  const TscopfModel m = build_tscopf_model(c, k, LoadVoltageAssumption::flat(), opf.dispatch);
  nlp::SolveReport report;
  report.status = nlp::SolveStatus::optimal;
  report.solve_seconds = 1.0;
  const std::string a = nlp_statistics_json(*m.problem, report);
  report.solve_seconds = 2.0;
  CHECK(nlp_statistics_json(*m.problem, report) == a);
  CHECK(a.find("\"variables\"") != std::string::npos);
  const std::string dump = nlp_dump_json(*m.problem);
  CHECK(dump.find("coi_angle_limit") != std::string::npos);
}

TEST_CASE("SVG rendering is deterministic and escapes text") {
  PlotSpec p;
  p.title = "G3 <delta> & co";
  p.x_label = "time (s)";
  p.y_label = "deg";
  p.series.push_back({"a", {0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}});
  p.series.push_back({"b", {0.0, 2.0}, {-1.0, 3.0}});
  const std::string svg = render_svg(p);
  CHECK(svg == render_svg(p));
  CHECK(svg.find("<svg xmlns") != std::string::npos);
  CHECK(svg.find("&lt;delta&gt; &amp; co") != std::string::npos);
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
  CHECK(lines == 2);
}
