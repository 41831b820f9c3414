#include <cmath>
#include <random>

#include "tscopf/nlp.hpp"

namespace tscopf::nlp {
namespace {

double rel_error(double fd, double analytic) { return std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)); }

double step_for(double xj) { return 1e-6 * (1.0 + std::abs(xj)); }

// Gradient of sigma*f + lambda^T c with respect to x, from the analytic derivatives.
std::vector<double> lagrangian_gradient(const ProblemEvaluator& ev, std::span<const double> x, double sigma,
                                        std::span<const double> lambda) {
  std::vector<double> g(ev.n());
  ev.gradient(x, g);
  for (auto& v : g) v *= sigma;
  std::vector<double> jac(ev.jacobian_pattern().size());
  ev.jacobian_values(x, jac);
  const auto& pat = ev.jacobian_pattern();
  for (std::size_t k = 0; k < pat.size(); ++k) g[pat[k].second] += lambda[pat[k].first] * jac[k];
  return g;
}

}  // namespace

DerivativeReport check_derivatives(const NlpProblem& problem, std::span<const double> point, bool check_hessian) {
  ProblemEvaluator ev(problem);
  const std::size_t n = ev.n();
  const std::size_t m = ev.m();
  const auto& vars = problem.variables();
  std::vector<double> x(point.begin(), point.end());
  if (x.size() != n) throw std::invalid_argument("point has wrong dimension");

  // Analytic Jacobian by column, objective gradient as an extra "row" m.
  std::vector<double> jac(ev.jacobian_pattern().size());
  ev.jacobian_values(x, jac);
  std::vector<double> grad(n);
  ev.gradient(x, grad);
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(n);
  const auto& pat = ev.jacobian_pattern();
  for (std::size_t k = 0; k < pat.size(); ++k) columns[pat[k].second].emplace_back(pat[k].first, jac[k]);

  DerivativeReport report;
  auto row_names = [&](std::size_t row) -> std::pair<std::string, std::string> {
    if (row == m) return {"objective", "objective"};
    return {problem.blocks()[ev.row_block(row)]->name(), ev.row_label(row)};
  };
  auto record = [&](std::size_t row, std::size_t var, double analytic, double fd) {
    ++report.entries_checked;
    const double err = rel_error(fd, analytic);
    if (err > report.max_relative_error || std::isnan(err)) {
      report.max_relative_error = err;
      auto [block, label] = row_names(row);
      report.worst = {block, label, vars[var].name, "", analytic, fd, err};
    }
  };

  std::vector<double> c_plus(m), c_minus(m), analytic_col(m + 1);
  std::vector<char> touched(m + 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = step_for(x[j]);
    const double saved = x[j];
    x[j] = saved + h;
    ev.constraints(x, c_plus);
    const double f_plus = ev.objective(x);
    x[j] = saved - h;
    ev.constraints(x, c_minus);
    const double f_minus = ev.objective(x);
    x[j] = saved;

    std::fill(analytic_col.begin(), analytic_col.end(), 0.0);
    for (const auto& [row, v] : columns[j]) analytic_col[row] += v;
    analytic_col[m] = grad[j];
    for (std::size_t i = 0; i < m; ++i) record(i, j, analytic_col[i], (c_plus[i] - c_minus[i]) / (2.0 * h));
    record(m, j, analytic_col[m], (f_plus - f_minus) / (2.0 * h));
  }

  if (check_hessian) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> lambda(m);
    for (auto& l : lambda) l = dist(rng);
    const double sigma = 1.0;

    std::vector<double> hv(ev.hessian_pattern().size());
    ev.hessian_values(x, sigma, lambda, hv);
    // Full symmetric columns of the analytic Hessian.
    std::vector<std::vector<std::pair<std::size_t, double>>> hcols(n);
    const auto& hpat = ev.hessian_pattern();
    for (std::size_t k = 0; k < hpat.size(); ++k) {
      const auto [a, b] = hpat[k];
      hcols[b].emplace_back(a, hv[k]);
      if (a != b) hcols[a].emplace_back(b, hv[k]);
    }
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = step_for(x[j]);
      const double saved = x[j];
      x[j] = saved + h;
      const auto gp = lagrangian_gradient(ev, x, sigma, lambda);
      x[j] = saved - h;
      const auto gm = lagrangian_gradient(ev, x, sigma, lambda);
      x[j] = saved;
      std::fill(col.begin(), col.end(), 0.0);
      for (const auto& [i, v] : hcols[j]) col[i] += v;
      for (std::size_t i = 0; i < n; ++i) {
        const double fd = (gp[i] - gm[i]) / (2.0 * h);
        const double err = rel_error(fd, col[i]);
        if (err > report.hessian_max_relative_error || std::isnan(err)) {
          report.hessian_max_relative_error = err;
          report.hessian_worst = {"lagrangian", "", vars[i].name, vars[j].name, col[i], fd, err};
        }
      }
    }
  }
  return report;
}

}  // namespace tscopf::nlp
