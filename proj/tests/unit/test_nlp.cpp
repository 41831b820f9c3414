#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "tscopf/nlp.hpp"

using namespace tscopf::nlp;

namespace {

// Classic four-variable test problem with known optimum 17.0140172891.
class Hs071Objective final : public ConstraintBlock {
 public:
  Hs071Objective() : ConstraintBlock("objective", ConstraintKind::equality, 1) {}
  void evaluate(std::span<const double> x, Evaluation& out) const override {
    const double s = x[0] + x[1] + x[2];
    out.add_residual(0, x[0] * x[3] * s + x[2]);
    if (out.wants_jacobian()) {
      out.add_jacobian(0, 0, x[3] * (s + x[0]));
      out.add_jacobian(0, 1, x[0] * x[3]);
      out.add_jacobian(0, 2, x[0] * x[3] + 1.0);
      out.add_jacobian(0, 3, x[0] * s);
    }
    if (out.wants_hessian()) {
      out.add_hessian(0, 0, 0, 2.0 * x[3]);
      out.add_hessian(0, 1, 0, x[3]);
      out.add_hessian(0, 2, 0, x[3]);
      out.add_hessian(0, 3, 0, 2.0 * x[0] + x[1] + x[2]);
      out.add_hessian(0, 3, 1, x[0]);
      out.add_hessian(0, 3, 2, x[0]);
    }
  }
};

// 25 - x1 x2 x3 x4 <= 0
class ProductBound final : public ConstraintBlock {
 public:
  ProductBound() : ConstraintBlock("product", ConstraintKind::inequality, 1) {}
  void evaluate(std::span<const double> x, Evaluation& out) const override {
    out.add_residual(0, 25.0 - x[0] * x[1] * x[2] * x[3]);
    if (out.wants_jacobian()) {
      for (std::size_t i = 0; i < 4; ++i) {
        double p = 1.0;
        for (std::size_t j = 0; j < 4; ++j)
          if (j != i) p *= x[j];
        out.add_jacobian(0, i, -p);
      }
    }
    if (out.wants_hessian()) {
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          double p = 1.0;
          for (std::size_t k = 0; k < 4; ++k)
            if (k != i && k != j) p *= x[k];
          out.add_hessian(0, i, j, -p);
        }
      }
    }
  }
};

// sum x_i^2 - 40 = 0
class SphereEquality final : public ConstraintBlock {
 public:
  SphereEquality() : ConstraintBlock("sphere", ConstraintKind::equality, 1) {}
  void evaluate(std::span<const double> x, Evaluation& out) const override {
    double s = -40.0;
    for (std::size_t i = 0; i < 4; ++i) {
      s += x[i] * x[i];
      if (out.wants_jacobian()) out.add_jacobian(0, i, 2.0 * x[i]);
      if (out.wants_hessian()) out.add_hessian(0, i, i, 2.0);
    }
    out.add_residual(0, s);
  }
};

NlpProblem hs071() {
  NlpProblem p;
  const double start[4] = {1.0, 5.0, 5.0, 1.0};
  for (int i = 0; i < 4; ++i) p.add_variable("x" + std::to_string(i + 1), 1.0, 5.0, start[i]);
  p.set_objective(std::make_unique<Hs071Objective>());
  p.add_block(std::make_unique<ProductBound>());
  p.add_block(std::make_unique<SphereEquality>());
  return p;
}

// x0 + x1 <= -1 with both variables non-negative.
class Impossible final : public ConstraintBlock {
 public:
  Impossible() : ConstraintBlock("impossible", ConstraintKind::inequality, 1) {}
  void evaluate(std::span<const double> x, Evaluation& out) const override {
    out.add_residual(0, x[0] + x[1] + 1.0);
    if (out.wants_jacobian()) {
      out.add_jacobian(0, 0, 1.0);
      out.add_jacobian(0, 1, 1.0);
    }
  }
};

class LinearObjective final : public ConstraintBlock {
 public:
  LinearObjective() : ConstraintBlock("objective", ConstraintKind::equality, 1) {}
  void evaluate(std::span<const double> x, Evaluation& out) const override {
    out.add_residual(0, x[0] + 2.0 * x[1]);
    if (out.wants_jacobian()) {
      out.add_jacobian(0, 0, 1.0);
      out.add_jacobian(0, 1, 2.0);
    }
  }
};

// Emits a different sparsity pattern depending on the sign of x0.
class Unstable final : public ConstraintBlock {
 public:
  Unstable() : ConstraintBlock("unstable", ConstraintKind::equality, 1) {}
  void evaluate(std::span<const double> x, Evaluation& out) const override {
    out.add_residual(0, x[0]);
    if (out.wants_jacobian()) out.add_jacobian(0, x[0] > 0 ? 0 : 1, 1.0);
  }
};

}  // namespace

TEST_CASE("interior point solves the four-variable benchmark") {
  const NlpProblem p = hs071();
  SolverOptions o;
  o.tol_kkt = 1e-10;
  o.tol_feas = 1e-10;
  const SolveReport r = solve(p, o);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective_value == doctest::Approx(17.0140172891).epsilon(1e-8));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(4.74299963).epsilon(1e-6));
  CHECK(r.x[2] == doctest::Approx(3.82114998).epsilon(1e-6));
  CHECK(r.x[3] == doctest::Approx(1.37940829).epsilon(1e-6));
  CHECK(r.kkt_stationarity <= 1e-10);
  CHECK(r.kkt_feasibility <= 1e-10);
  CHECK(r.kkt_complementarity <= 1e-10);
  // Inequality multiplier is non-negative and the product bound is active.
  CHECK(r.multipliers[0] >= 0.0);
  CHECK(r.x[0] * r.x[1] * r.x[2] * r.x[3] == doctest::Approx(25.0).epsilon(1e-6));
}

TEST_CASE("solver output is deterministic") {
  const NlpProblem p = hs071();
  const SolveReport a = solve(p);
  const SolveReport b = solve(p);
  CHECK(a.iterations == b.iterations);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.x[i] == b.x[i]);
}

TEST_CASE("infeasible problems are reported with the violated block") {
  NlpProblem p;
  p.add_variable("a", 0.0, infinity, 1.0);
  p.add_variable("b", 0.0, infinity, 1.0);
  p.set_objective(std::make_unique<LinearObjective>());
  p.add_block(std::make_unique<Impossible>());
  const SolveReport r = solve(p);
  CHECK(r.status != SolveStatus::optimal);
  CHECK(r.status != SolveStatus::acceptable);
  CHECK(r.worst_block == "impossible");
  CHECK(r.worst_violation > 0.5);
}

TEST_CASE("analytic derivatives of the benchmark agree with finite differences") {
  const NlpProblem p = hs071();
  const std::vector<double> x{1.3, 4.1, 3.7, 1.9};
  const DerivativeReport d = check_derivatives(p, x, true);
  CHECK(d.max_relative_error < 1e-7);
  CHECK(d.hessian_max_relative_error < 1e-6);
  CHECK(d.entries_checked > 0);
}

TEST_CASE("evaluator flattens blocks and reports row kinds") {
  const NlpProblem p = hs071();
  const ProblemEvaluator ev(p);
  CHECK(ev.n() == 4);
  CHECK(ev.m() == 2);
  CHECK(ev.row_kind(0) == ConstraintKind::inequality);
  CHECK(ev.row_kind(1) == ConstraintKind::equality);
  CHECK(ev.jacobian_pattern().size() == 8);
  for (const auto& [a, b] : ev.hessian_pattern()) CHECK(a >= b);
  std::vector<double> c(2);
  const std::vector<double> x{1.0, 5.0, 5.0, 1.0};
  ev.constraints(x, c);
  CHECK(c[0] == doctest::Approx(0.0));
  CHECK(c[1] == doctest::Approx(12.0));
}

TEST_CASE("sparsity patterns must not depend on the point") {
  NlpProblem p;
  p.add_variable("a", -1.0, 1.0, 0.5);
  p.add_variable("b", -1.0, 1.0, 0.5);
  p.set_objective(std::make_unique<LinearObjective>());
  p.add_block(std::make_unique<Unstable>());
  const ProblemEvaluator ev(p);
  std::vector<double> values(ev.jacobian_pattern().size());
  const std::vector<double> x{-0.5, 0.5};
  CHECK_THROWS(ev.jacobian_values(x, values));
}

TEST_CASE("problem validation") {
  NlpProblem p;
  p.add_variable("a", 0.0, 1.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // no objective
  p.set_objective(std::make_unique<LinearObjective>());
  p.add_variable("b", 0.0, 1.0);
  CHECK_NOTHROW(p.validate());
  NlpProblem q;
  q.add_variable("a", 0.0, 1.0);
  q.add_variable("b", 0.0, 1.0);
  q.set_objective(std::make_unique<LinearObjective>());
  q.add_variable("a", 0.0, 1.0);
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  p.set_bounds(1, 2.0, 1.0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
