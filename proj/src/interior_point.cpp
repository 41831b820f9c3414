//   min f(x)  s.t.  c_E(x) = 0,  c_I(x) <= 0,  l <= x <= u.
//
// Inequalities become c_I(x) + s = 0 with s >= 0; bounds and slacks carry a
// logarithmic barrier. Each iteration solves the condensed primal-dual
// Newton system
//
//   [ W + Sigma_x + dw I      J^T ] [dx]   [ -r_x ]
//   [ J                       -D  ] [dy] = [ -r_c ]
//
// by sparse LDL^T. A small static regularisation keeps the matrix
// quasi-definite so that a pivot-free factorisation exists for any ordering;
// iterative refinement then recovers the step of the unregularised system.
// When refinement stalls the iteration is refactorised with a far smaller
// dual regularisation.
// Steps are accepted by a filter line search with second-order corrections.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "tscopf/nlp.hpp"

namespace tscopf::nlp {
namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

constexpr double kappa_sigma = 1e10;
constexpr double static_primal_reg = 1e-8;
constexpr double static_dual_reg = 1e-8;
constexpr double refine_target = 1e-12;
// Used for an iteration whose refinement stalls above 10 * refine_target.
constexpr double fallback_dual_reg = 1e-12;
constexpr double armijo_eta = 1e-4;
// Filter line-search constants.
constexpr double gamma_theta = 1e-5;
constexpr double gamma_phi = 1e-8;
constexpr double gamma_alpha = 0.05;
constexpr double delta_switch = 1.0;
constexpr double s_theta = 1.1;
constexpr double s_phi = 2.3;
constexpr double soc_kappa = 0.99;

struct Step {
  Eigen::VectorXd dx, dy, ds, dzl, dzu, dzs;
};
constexpr double scaling_threshold = 100.0;

/// Fixed lower-triangular pattern of the KKT matrix with precomputed slots
/// for every Hessian, Jacobian and diagonal contribution.
class KktMatrix {
 public:
  KktMatrix(std::size_t n_free, std::size_t m, const std::vector<Coordinate>& hess,
            const std::vector<Coordinate>& jac, const std::vector<long>& free_index) {
    dim_ = n_free + m;
    std::vector<std::pair<int, int>> coords;  // (col, row), row >= col
    coords.reserve(dim_ + hess.size() + jac.size());
    for (std::size_t i = 0; i < dim_; ++i) coords.emplace_back(static_cast<int>(i), static_cast<int>(i));
    for (const auto& [a, b] : hess) {
      if (free_index[a] < 0 || free_index[b] < 0) continue;
      coords.emplace_back(static_cast<int>(free_index[b]), static_cast<int>(free_index[a]));
    }
    for (const auto& [row, var] : jac) {
      if (free_index[var] < 0) continue;
      coords.emplace_back(static_cast<int>(free_index[var]), static_cast<int>(n_free + row));
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    matrix_.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    matrix_.resizeNonZeros(static_cast<Eigen::Index>(coords.size()));
    int* outer = matrix_.outerIndexPtr();
    int* inner = matrix_.innerIndexPtr();
    std::fill(outer, outer + dim_ + 1, 0);
    for (std::size_t k = 0; k < coords.size(); ++k) {
      ++outer[coords[k].first + 1];
      inner[k] = coords[k].second;
    }
    for (std::size_t c = 0; c < dim_; ++c) outer[c + 1] += outer[c];

    auto slot = [&](int col, int row) {
      auto it = std::lower_bound(coords.begin(), coords.end(), std::make_pair(col, row));
      return static_cast<long>(it - coords.begin());
    };
    diag_slot_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) diag_slot_[i] = slot(static_cast<int>(i), static_cast<int>(i));
    hess_slot_.resize(hess.size(), -1);
    for (std::size_t k = 0; k < hess.size(); ++k) {
      const auto [a, b] = hess[k];
      if (free_index[a] >= 0 && free_index[b] >= 0) {
        hess_slot_[k] = slot(static_cast<int>(free_index[b]), static_cast<int>(free_index[a]));
      }
    }
    jac_slot_.resize(jac.size(), -1);
    for (std::size_t k = 0; k < jac.size(); ++k) {
      const auto [row, var] = jac[k];
      if (free_index[var] >= 0) jac_slot_[k] = slot(static_cast<int>(free_index[var]), static_cast<int>(n_free + row));
    }
  }

  void clear() { std::fill(matrix_.valuePtr(), matrix_.valuePtr() + matrix_.nonZeros(), 0.0); }
  void add_hessian(std::size_t k, double v) {
    if (hess_slot_[k] >= 0) matrix_.valuePtr()[hess_slot_[k]] += v;
  }
  void add_jacobian(std::size_t k, double v) {
    if (jac_slot_[k] >= 0) matrix_.valuePtr()[jac_slot_[k]] += v;
  }
  void add_diagonal(std::size_t i, double v) { matrix_.valuePtr()[diag_slot_[i]] += v; }

  const SpMat& matrix() const { return matrix_; }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_ = 0;
  SpMat matrix_;
  std::vector<long> diag_slot_;
  std::vector<long> hess_slot_;
  std::vector<long> jac_slot_;
};

struct BoundInfo {
  std::vector<std::size_t> lower_vars;  // free positions with finite lower bound
  std::vector<std::size_t> upper_vars;
};

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

class InteriorPoint {
 public:
  InteriorPoint(const NlpProblem& problem, const SolverOptions& options)
      : options_(options), eval_(problem), n_(eval_.n()), m_(eval_.m()) {
    const auto& vars = problem.variables();
    free_index_.assign(n_, -1);
    for (std::size_t j = 0; j < n_; ++j) {
      lower_.push_back(vars[j].lower);
      upper_.push_back(vars[j].upper);
      if (vars[j].lower < vars[j].upper) {
        free_index_[j] = static_cast<long>(free_vars_.size());
        free_vars_.push_back(j);
      }
    }
    n_free_ = free_vars_.size();
    for (std::size_t p = 0; p < n_free_; ++p) {
      const std::size_t j = free_vars_[p];
      if (std::isfinite(lower_[j])) bounds_.lower_vars.push_back(p);
      if (std::isfinite(upper_[j])) bounds_.upper_vars.push_back(p);
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (eval_.row_kind(i) == ConstraintKind::inequality) {
        slack_of_row_.push_back(static_cast<long>(ineq_rows_.size()));
        ineq_rows_.push_back(i);
      } else {
        slack_of_row_.push_back(-1);
      }
    }
    jac_values_.resize(eval_.jacobian_pattern().size());
    hess_values_.resize(eval_.hessian_pattern().size());
  }

  SolveReport run();

 private:
  // Problem evaluation at the current primal point.
  void evaluate_functions(const std::vector<double>& x, double& f, Vec& c) const {
    f = eval_.objective(x) * obj_scale_;
    c.resize(static_cast<Eigen::Index>(m_));
    eval_.constraints(x, std::span<double>(c.data(), m_));
  }

  Vec free_gradient(const std::vector<double>& x) const {
    std::vector<double> g(n_);
    eval_.gradient(x, g);
    Vec out(static_cast<Eigen::Index>(n_free_));
    for (std::size_t p = 0; p < n_free_; ++p) out[static_cast<Eigen::Index>(p)] = g[free_vars_[p]] * obj_scale_;
    return out;
  }

  // J^T y restricted to free variables.
  Vec jac_transpose_times(const Vec& y) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(n_free_));
    const auto& pat = eval_.jacobian_pattern();
    for (std::size_t k = 0; k < pat.size(); ++k) {
      const long p = free_index_[pat[k].second];
      if (p >= 0) out[p] += jac_values_[k] * y[static_cast<Eigen::Index>(pat[k].first)];
    }
    return out;
  }

  Vec jac_times(const Vec& dx) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(m_));
    const auto& pat = eval_.jacobian_pattern();
    for (std::size_t k = 0; k < pat.size(); ++k) {
      const long p = free_index_[pat[k].second];
      if (p >= 0) out[static_cast<Eigen::Index>(pat[k].first)] += jac_values_[k] * dx[p];
    }
    return out;
  }

  Vec hessian_times(const Vec& dx) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(n_free_));
    const auto& pat = eval_.hessian_pattern();
    for (std::size_t k = 0; k < pat.size(); ++k) {
      const long a = free_index_[pat[k].first];
      const long b = free_index_[pat[k].second];
      if (a < 0 || b < 0) continue;
      out[a] += hess_values_[k] * dx[b];
      if (a != b) out[b] += hess_values_[k] * dx[a];
    }
    return out;
  }

  double x_free(const std::vector<double>& x, std::size_t p) const { return x[free_vars_[p]]; }
  double lo(std::size_t p) const { return lower_[free_vars_[p]]; }
  double up(std::size_t p) const { return upper_[free_vars_[p]]; }

  double barrier_merit(const std::vector<double>& x, const Vec& s, double f, const Vec& c, double mu,
                       double nu) const;
  double constraint_l1(const Vec& c, const Vec& s) const;

  const SolverOptions& options_;
  ProblemEvaluator eval_;
  std::size_t n_;
  std::size_t m_;
  std::size_t n_free_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<long> free_index_;
  std::vector<std::size_t> free_vars_;
  BoundInfo bounds_;
  std::vector<std::size_t> ineq_rows_;
  std::vector<long> slack_of_row_;
  std::vector<double> jac_values_;
  std::vector<double> hess_values_;
  double obj_scale_ = 1.0;
};

double InteriorPoint::constraint_l1(const Vec& c, const Vec& s) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    const long k = slack_of_row_[i];
    sum += std::abs(c[static_cast<Eigen::Index>(i)] + (k >= 0 ? s[k] : 0.0));
  }
  return sum;
}

double InteriorPoint::barrier_merit(const std::vector<double>& x, const Vec& s, double f, const Vec& c,
                                    double mu, double nu) const {
  double phi = f;
  for (std::size_t p : bounds_.lower_vars) phi -= mu * std::log(x_free(x, p) - lo(p));
  for (std::size_t p : bounds_.upper_vars) phi -= mu * std::log(up(p) - x_free(x, p));
  for (Eigen::Index k = 0; k < s.size(); ++k) phi -= mu * std::log(s[k]);
  return phi + nu * constraint_l1(c, s);
}

SolveReport InteriorPoint::run() {
  const auto t_start = std::chrono::steady_clock::now();
  SolveReport report;
  const auto mi = static_cast<Eigen::Index>(m_);
  const auto ni = static_cast<Eigen::Index>(n_free_);
  const auto n_ineq = static_cast<Eigen::Index>(ineq_rows_.size());

  // Start point, projected strictly inside the bounds.
  std::vector<double> x = options_.start ? *options_.start : eval_.problem().start_point();
  if (x.size() != n_) throw std::invalid_argument("start point has wrong dimension");
  for (std::size_t j = 0; j < n_; ++j) {
    if (free_index_[j] < 0) {
      x[j] = lower_[j];
      continue;
    }
    const double l = lower_[j];
    const double u = upper_[j];
    const double range = u - l;
    if (std::isfinite(l)) {
      const double push = std::min(1e-2 * std::max(1.0, std::abs(l)), std::isfinite(range) ? 1e-2 * range : 1e300);
      x[j] = std::max(x[j], l + push);
    }
    if (std::isfinite(u)) {
      const double push = std::min(1e-2 * std::max(1.0, std::abs(u)), std::isfinite(range) ? 1e-2 * range : 1e300);
      x[j] = std::min(x[j], u - push);
    }
  }

  {
    std::vector<double> g(n_);
    eval_.gradient(x, g);
    double gmax = 0.0;
    for (std::size_t p = 0; p < n_free_; ++p) gmax = std::max(gmax, std::abs(g[free_vars_[p]]));
    obj_scale_ = gmax > scaling_threshold ? scaling_threshold / gmax : 1.0;
  }

  double mu = options_.mu_init;
  double f = 0.0;
  Vec c;
  evaluate_functions(x, f, c);

  Vec s(n_ineq);
  for (Eigen::Index k = 0; k < n_ineq; ++k) s[k] = std::max(-c[static_cast<Eigen::Index>(ineq_rows_[k])], 1e-2);

  Vec y = Vec::Zero(mi);
  Vec zl = Vec::Zero(ni);
  Vec zu = Vec::Zero(ni);
  for (std::size_t p : bounds_.lower_vars) zl[p] = mu / (x_free(x, p) - lo(p));
  for (std::size_t p : bounds_.upper_vars) zu[p] = mu / (up(p) - x_free(x, p));
  Vec zs(n_ineq);
  for (Eigen::Index k = 0; k < n_ineq; ++k) zs[k] = mu / s[k];

  KktMatrix kkt(n_free_, m_, eval_.hessian_pattern(), eval_.jacobian_pattern(), free_index_);
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  ldlt.analyzePattern(kkt.matrix());

  std::vector<std::pair<double, double>> filter;
  double filter_mu = -1.0;
  double theta_max = 0.0;
  double theta_min = 0.0;
  double delta_w_last = 0.0;
  const double s_max = 100.0;
  std::size_t n_bound_mult = bounds_.lower_vars.size() + bounds_.upper_vars.size() + static_cast<std::size_t>(n_ineq);

  auto log = [&](const std::string& line) {
    if (options_.log) *options_.log << line << '\n';
  };

  auto finish = [&](SolveStatus status, std::size_t iter, const std::string& message, double stat, double feas,
                    double compl_err) {
    report.status = status;
    report.x = x;
    report.iterations = iter;
    report.kkt_stationarity = stat;
    report.kkt_feasibility = feas;
    report.kkt_complementarity = compl_err;
    report.objective_value = eval_.objective(x);
    report.multipliers.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) report.multipliers[i] = y[static_cast<Eigen::Index>(i)] / obj_scale_;
    report.bound_multipliers.assign(n_, 0.0);
    for (std::size_t p = 0; p < n_free_; ++p) {
      report.bound_multipliers[free_vars_[p]] = (zu[static_cast<Eigen::Index>(p)] - zl[static_cast<Eigen::Index>(p)]) / obj_scale_;
    }
    std::vector<double> cv(m_);
    eval_.constraints(x, cv);
    auto [block, worst] = worst_violation(eval_, cv);
    report.worst_block = block;
    report.worst_violation = worst;
    report.message = message;
    report.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
  };

  struct Snapshot {
    double error;
    int iter;
    std::vector<double> x;
    Vec y, zl, zu;
    double stat, feas, compl_err;
  };
  std::optional<Snapshot> best;

  Vec grad;
  double last_alpha = 0.0;
  for (int iter = 0;; ++iter) {
    eval_.jacobian_values(x, jac_values_);
    grad = free_gradient(x);

    // Residuals of the KKT conditions.
    Vec r_x = grad + jac_transpose_times(y) - zl + zu;
    Vec r_s(n_ineq);
    for (Eigen::Index k = 0; k < n_ineq; ++k) r_s[k] = y[static_cast<Eigen::Index>(ineq_rows_[k])] - zs[k];
    Vec r_c = c;
    for (Eigen::Index k = 0; k < n_ineq; ++k) r_c[static_cast<Eigen::Index>(ineq_rows_[k])] += s[k];

    const double z_sum = zl.lpNorm<1>() + zu.lpNorm<1>() + zs.lpNorm<1>();
    const double s_d = std::max(s_max, (y.lpNorm<1>() + z_sum) / std::max<double>(1.0, static_cast<double>(m_ + n_bound_mult))) / s_max;
    const double s_c = std::max(s_max, z_sum / std::max<double>(1.0, static_cast<double>(n_bound_mult))) / s_max;

    auto complementarity = [&](double target) {
      double e = 0.0;
      for (std::size_t p : bounds_.lower_vars) e = std::max(e, std::abs((x_free(x, p) - lo(p)) * zl[p] - target));
      for (std::size_t p : bounds_.upper_vars) e = std::max(e, std::abs((up(p) - x_free(x, p)) * zu[p] - target));
      for (Eigen::Index k = 0; k < n_ineq; ++k) e = std::max(e, std::abs(s[k] * zs[k] - target));
      return e / s_c;
    };
    const double stat = std::max(inf_norm(r_x), inf_norm(r_s)) / s_d;
    double feas = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double ci = c[static_cast<Eigen::Index>(i)];
      feas = std::max(feas, eval_.row_kind(i) == ConstraintKind::equality ? std::abs(ci) : std::max(0.0, ci));
    }
    feas = std::max(feas, inf_norm(r_c));
    const double compl0 = complementarity(0.0);

    if (options_.log) {
      std::ostringstream line;
      line << std::setw(4) << iter << std::scientific << std::setprecision(3) << "  f=" << f / obj_scale_
           << "  stat=" << stat << "  feas=" << feas << "  compl=" << compl0 << "  mu=" << mu
           << "  alpha=" << last_alpha;
      log(line.str());
    }

    const bool strict = stat <= options_.tol_kkt && feas <= options_.tol_feas && compl0 <= options_.tol_kkt;
    if (strict) return finish(SolveStatus::optimal, static_cast<std::size_t>(iter), "converged", stat, feas, compl0);

    const double acc_kkt = std::max(options_.acceptable_kkt, options_.tol_kkt);
    const double acc_feas = std::max(options_.acceptable_feas, options_.tol_feas);
    if (std::isfinite(stat) && std::isfinite(feas) && stat <= acc_kkt && feas <= acc_feas && compl0 <= acc_kkt) {
      const double err = std::max({stat / acc_kkt, feas / acc_feas, compl0 / acc_kkt});
      if (!best || err < best->error) best = Snapshot{err, iter, x, y, zl, zu, stat, feas, compl0};
    }
    // Returns the best acceptable iterate, if any.
    auto finish_acceptable = [&](const std::string& reason) -> std::optional<SolveReport> {
      if (!best) return std::nullopt;
      x = best->x;
      y = best->y;
      zl = best->zl;
      zu = best->zu;
      return finish(SolveStatus::acceptable, static_cast<std::size_t>(iter),
                    "acceptable point from iteration " + std::to_string(best->iter) + " (" + reason + ")",
                    best->stat, best->feas, best->compl_err);
    };

    if (!std::isfinite(stat) || !std::isfinite(feas)) {
      if (auto r = finish_acceptable("non-finite residuals")) return *r;
      return finish(SolveStatus::numerical_failure, static_cast<std::size_t>(iter),
                    "non-finite residuals at iteration " + std::to_string(iter), stat, feas, compl0);
    }
    if (best && iter - best->iter >= options_.acceptable_window) {
      if (auto r = finish_acceptable("no further progress")) return *r;
    }
    if (iter >= options_.max_iterations) {
      if (auto r = finish_acceptable("iteration limit")) return *r;
      const bool stuck_infeasible = feas > std::max(1e-4, 100.0 * options_.tol_feas);
      return finish(stuck_infeasible ? SolveStatus::infeasible : SolveStatus::iteration_limit,
                    static_cast<std::size_t>(iter),
                    "iteration limit reached (stationarity " + std::to_string(stat) + ", feasibility " +
                        std::to_string(feas) + ")",
                    stat, feas, compl0);
    }
    if (inf_norm(y) > 1e14) {
      return finish(SolveStatus::infeasible, static_cast<std::size_t>(iter),
                    "constraint multipliers diverged; problem appears locally infeasible", stat, feas, compl0);
    }

    // Monotone barrier update.
    const double kappa_eps = 10.0;
    const double mu_min = options_.tol_kkt / 10.0;
    while (mu > mu_min) {
      const double e_mu = std::max({stat, feas, complementarity(mu)});
      if (e_mu > kappa_eps * mu) break;
      mu = std::max(mu_min, std::min(options_.mu_factor * mu, std::pow(mu, 1.5)));
    }
    const double tau = std::max(0.99, 1.0 - mu);

    // Sigma and barrier gradient.
    Vec sigma_x = Vec::Zero(ni);
    Vec rhs_x = grad + jac_transpose_times(y);
    for (std::size_t p : bounds_.lower_vars) {
      const double d = x_free(x, p) - lo(p);
      sigma_x[p] += zl[p] / d;
      rhs_x[p] -= mu / d;
    }
    for (std::size_t p : bounds_.upper_vars) {
      const double d = up(p) - x_free(x, p);
      sigma_x[p] += zu[p] / d;
      rhs_x[p] += mu / d;
    }
    Vec sigma_s(n_ineq);
    Vec r_s_mu(n_ineq);
    for (Eigen::Index k = 0; k < n_ineq; ++k) {
      sigma_s[k] = zs[k] / s[k];
      r_s_mu[k] = y[static_cast<Eigen::Index>(ineq_rows_[k])] - mu / s[k];
    }

    std::vector<double> yv(y.data(), y.data() + m_);
    eval_.hessian_values(x, obj_scale_, yv, hess_values_);

    // Factorise with inertia correction.
    double delta_w = 0.0;
    double delta_c = 0.0;
    double dual_reg = static_dual_reg;
    auto factorise = [&]() {
      delta_w = 0.0;
      delta_c = 0.0;
      for (int attempts = 0; attempts < 60; ++attempts) {
        kkt.clear();
        for (std::size_t k = 0; k < hess_values_.size(); ++k) kkt.add_hessian(k, hess_values_[k]);
        for (std::size_t k = 0; k < jac_values_.size(); ++k) kkt.add_jacobian(k, jac_values_[k]);
        for (std::size_t p = 0; p < n_free_; ++p) kkt.add_diagonal(p, sigma_x[static_cast<Eigen::Index>(p)] + delta_w + static_primal_reg);
        for (std::size_t i = 0; i < m_; ++i) {
          const long k = slack_of_row_[i];
          const double d = k >= 0 ? 1.0 / (sigma_s[k] + delta_w) : 0.0;
          kkt.add_diagonal(n_free_ + i, -(d + delta_c + dual_reg));
        }
        ldlt.factorize(kkt.matrix());
        bool ok = ldlt.info() == Eigen::Success;
        if (ok) {
          const Vec& dvec = ldlt.vectorD();
          std::size_t positive = 0;
          for (Eigen::Index i = 0; i < dvec.size(); ++i) {
            if (!std::isfinite(dvec[i])) ok = false;
            if (dvec[i] > 0) ++positive;
          }
          if (ok && positive == n_free_) return true;
          if (ok && positive > n_free_ && delta_c == 0.0) {
            // Too many positive pivots: the constraint block is rank deficient.
            delta_c = 1e-8 * std::pow(mu, 0.25);
            continue;
          }
        } else if (delta_c == 0.0) {
          delta_c = 1e-8 * std::pow(mu, 0.25);
          continue;
        }
        if (delta_w == 0.0) {
          delta_w = delta_w_last == 0.0 ? 1e-4 : std::max(1e-20, delta_w_last / 3.0);
        } else {
          delta_w *= (delta_w_last == 0.0 ? 100.0 : 8.0);
        }
        if (delta_w > 1e40) break;
      }
      return false;
    };
    if (!factorise()) {
      if (auto r = finish_acceptable("factorisation failure")) return *r;
      return finish(SolveStatus::numerical_failure, static_cast<std::size_t>(iter),
                    "KKT factorisation failed at iteration " + std::to_string(iter) + " (stationarity " +
                        std::to_string(stat) + ", feasibility " + std::to_string(feas) + ")",
                    stat, feas, compl0);
    }
    if (delta_w > 0.0) delta_w_last = delta_w;

    // Solves the condensed system for a given constraint residual and
    // recovers the slack and bound-multiplier components.
    auto apply_target = [&](const Vec& v) {
      Vec out = kkt.matrix().selfadjointView<Eigen::Lower>() * v;
      out.head(ni) -= static_primal_reg * v.head(ni);
      out.tail(mi) += dual_reg * v.tail(mi);
      return out;
    };
    bool refined = true;
    auto direction = [&](const Vec& c_res) {
      Vec rhs(static_cast<Eigen::Index>(n_free_ + m_));
      rhs.head(ni) = -rhs_x;
      for (std::size_t i = 0; i < m_; ++i) {
        const long k = slack_of_row_[i];
        double v = -c_res[static_cast<Eigen::Index>(i)];
        if (k >= 0) v += r_s_mu[k] / (sigma_s[k] + delta_w);
        rhs[static_cast<Eigen::Index>(n_free_ + i)] = v;
      }
      Vec sol = ldlt.solve(rhs);
      double res_norm = inf_norm(rhs - apply_target(sol));
      const double target = refine_target * (1.0 + inf_norm(rhs));
      for (int refine = 0; refine < 10 && res_norm > target; ++refine) {
        Vec candidate = sol + ldlt.solve(rhs - apply_target(sol));
        const double cand_norm = inf_norm(rhs - apply_target(candidate));
        if (!(cand_norm < res_norm)) break;
        sol = candidate;
        res_norm = cand_norm;
      }
      refined = res_norm <= 10.0 * target;
      Step st;
      st.dx = sol.head(ni);
      st.dy = sol.tail(mi);
      st.ds.resize(n_ineq);
      for (Eigen::Index k = 0; k < n_ineq; ++k) {
        st.ds[k] = -(r_s_mu[k] + st.dy[static_cast<Eigen::Index>(ineq_rows_[k])]) / (sigma_s[k] + delta_w);
      }
      st.dzl = Vec::Zero(ni);
      st.dzu = Vec::Zero(ni);
      for (std::size_t p : bounds_.lower_vars) {
        const double d = x_free(x, p) - lo(p);
        st.dzl[p] = mu / d - zl[p] - zl[p] / d * st.dx[p];
      }
      for (std::size_t p : bounds_.upper_vars) {
        const double d = up(p) - x_free(x, p);
        st.dzu[p] = mu / d - zu[p] + zu[p] / d * st.dx[p];
      }
      st.dzs.resize(n_ineq);
      for (Eigen::Index k = 0; k < n_ineq; ++k) st.dzs[k] = mu / s[k] - zs[k] - sigma_s[k] * st.ds[k];
      return st;
    };

    // Fraction to the boundary.
    auto primal_limit = [&](const Step& st) {
      double a = 1.0;
      for (std::size_t p : bounds_.lower_vars) {
        if (st.dx[p] < 0) a = std::min(a, -tau * (x_free(x, p) - lo(p)) / st.dx[p]);
      }
      for (std::size_t p : bounds_.upper_vars) {
        if (st.dx[p] > 0) a = std::min(a, tau * (up(p) - x_free(x, p)) / st.dx[p]);
      }
      for (Eigen::Index k = 0; k < n_ineq; ++k) {
        if (st.ds[k] < 0) a = std::min(a, -tau * s[k] / st.ds[k]);
      }
      return a;
    };
    auto dual_limit = [&](const Step& st) {
      double a = 1.0;
      for (std::size_t p : bounds_.lower_vars) {
        if (st.dzl[p] < 0) a = std::min(a, -tau * zl[p] / st.dzl[p]);
      }
      for (std::size_t p : bounds_.upper_vars) {
        if (st.dzu[p] < 0) a = std::min(a, -tau * zu[p] / st.dzu[p]);
      }
      for (Eigen::Index k = 0; k < n_ineq; ++k) {
        if (st.dzs[k] < 0) a = std::min(a, -tau * zs[k] / st.dzs[k]);
      }
      return a;
    };

    Step step = direction(r_c);
    if (!refined && dual_reg > fallback_dual_reg) {
      // Refinement stalled: the regularisation dominates some pivot, typically
      // the s/z term of a nearly active inequality. Retry with a much smaller
      // one and fall back to the first factorisation if that fails.
      dual_reg = fallback_dual_reg;
      if (!factorise()) {
        dual_reg = static_dual_reg;
        factorise();
      }
      step = direction(r_c);
    }
    const double alpha_max = primal_limit(step);

    // Filter line search on (theta, phi): constraint violation and barrier
    // objective. The filter is reset whenever mu changes.
    if (mu != filter_mu) {
      filter.clear();
      filter_mu = mu;
    }
    const double theta = constraint_l1(c, s);
    if (iter == 0) {
      theta_max = 1e4 * std::max(1.0, theta);
      theta_min = 1e-4 * std::max(1.0, theta);
    }
    const double phi = barrier_merit(x, s, f, c, mu, 0.0);
    double grad_phi = grad.dot(step.dx);
    for (std::size_t p : bounds_.lower_vars) grad_phi -= mu * step.dx[p] / (x_free(x, p) - lo(p));
    for (std::size_t p : bounds_.upper_vars) grad_phi += mu * step.dx[p] / (up(p) - x_free(x, p));
    for (Eigen::Index k = 0; k < n_ineq; ++k) grad_phi -= mu * step.ds[k] / s[k];

    double alpha_min = gamma_alpha * gamma_theta;
    if (grad_phi < 0.0) {
      alpha_min = std::min(gamma_theta, gamma_phi * theta / -grad_phi);
      if (theta <= theta_min) {
        alpha_min = std::min(alpha_min, delta_switch * std::pow(theta, s_theta) / std::pow(-grad_phi, s_phi));
      }
      alpha_min *= gamma_alpha;
    }

    std::vector<double> x_trial(x);
    Vec s_trial(n_ineq);
    Vec c_trial;
    double f_trial = 0.0;
    auto trial_point = [&](const Step& st, double a, double& theta_t, double& phi_t) {
      x_trial = x;
      for (std::size_t p = 0; p < n_free_; ++p) x_trial[free_vars_[p]] += a * st.dx[static_cast<Eigen::Index>(p)];
      s_trial = s + a * st.ds;
      evaluate_functions(x_trial, f_trial, c_trial);
      theta_t = constraint_l1(c_trial, s_trial);
      phi_t = barrier_merit(x_trial, s_trial, f_trial, c_trial, mu, 0.0);
    };
    auto in_filter = [&](double theta_t, double phi_t) {
      if (!(theta_t <= theta_max)) return true;
      for (const auto& [ft, fp] : filter) {
        if (theta_t >= ft && phi_t >= fp) return true;
      }
      return false;
    };
    // Returns 0 if rejected, 1 if accepted by sufficient decrease in theta or
    // phi, 2 if accepted as an Armijo step on phi.
    auto acceptable = [&](double a, double theta_t, double phi_t) -> int {
      if (!std::isfinite(theta_t) || !std::isfinite(phi_t) || in_filter(theta_t, phi_t)) return 0;
      const bool switching =
          grad_phi < 0.0 && a * std::pow(-grad_phi, s_phi) > delta_switch * std::pow(theta, s_theta);
      if (switching && theta <= theta_min) {
        return phi_t <= phi + armijo_eta * a * grad_phi ? 2 : 0;
      }
      if (theta_t <= (1.0 - gamma_theta) * theta || phi_t <= phi - gamma_phi * theta) return 1;
      return 0;
    };
    auto trial_residual = [&]() {
      Vec r = c_trial;
      for (Eigen::Index k = 0; k < n_ineq; ++k) r[static_cast<Eigen::Index>(ineq_rows_[k])] += s_trial[k];
      return r;
    };

    // Negligible steps: accept outright and let mu decrease.
    double rel_step = 0.0;
    for (std::size_t p = 0; p < n_free_; ++p) {
      rel_step = std::max(rel_step, std::abs(step.dx[static_cast<Eigen::Index>(p)]) / (1.0 + std::abs(x_free(x, p))));
    }
    const bool tiny = rel_step < 10.0 * std::numeric_limits<double>::epsilon() && theta < 1e-4 * std::max(1.0, theta_min);

    double alpha = alpha_max;
    int verdict = 0;
    if (tiny) {
      double tt = 0.0, pt = 0.0;
      trial_point(step, alpha, tt, pt);
      verdict = 2;
    }
    for (int ls = 0; verdict == 0 && ls < 60 && alpha >= alpha_min; ++ls) {
      double theta_t = 0.0, phi_t = 0.0;
      trial_point(step, alpha, theta_t, phi_t);
      verdict = acceptable(alpha, theta_t, phi_t);
      if (verdict != 0) break;
      if (ls == 0 && !(theta_t < theta)) {
        // Second-order correction for the full step.
        Vec c_soc = alpha * r_c + trial_residual();
        double theta_old = theta_t;
        for (int k = 0; k < 4; ++k) {
          Step soc = direction(c_soc);
          const double a_soc = primal_limit(soc);
          double theta_s = 0.0, phi_s = 0.0;
          trial_point(soc, a_soc, theta_s, phi_s);
          const int v = acceptable(alpha, theta_s, phi_s);
          if (v != 0) {
            verdict = v;
            step = std::move(soc);
            alpha = a_soc;
            break;
          }
          if (!(theta_s <= soc_kappa * theta_old)) break;
          theta_old = theta_s;
          c_soc = a_soc * c_soc + trial_residual();
        }
        if (verdict != 0) break;
      }
      alpha *= 0.5;
    }
    if (verdict == 0) {
      // Fallback: restart the filter and take the longest step along which
      // the constraint violation decreases.
      filter.clear();
      alpha = alpha_max;
      for (int ls = 0; ls < 60; ++ls) {
        double theta_t = 0.0, phi_t = 0.0;
        trial_point(step, alpha, theta_t, phi_t);
        if (std::isfinite(theta_t) && std::isfinite(phi_t) &&
            (theta_t < theta || (theta_t <= theta && phi_t < phi))) {
          verdict = 1;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (verdict == 0) {
      if (auto r = finish_acceptable("line search failure")) return *r;
      const bool infeasible = feas > std::max(1e-4, 100.0 * options_.tol_feas);
      return finish(infeasible ? SolveStatus::infeasible : SolveStatus::numerical_failure,
                    static_cast<std::size_t>(iter),
                    "line search failed at iteration " + std::to_string(iter) + " (stationarity " +
                        std::to_string(stat) + ", feasibility " + std::to_string(feas) + ")",
                    stat, feas, compl0);
    }
    if (verdict == 1) filter.emplace_back((1.0 - gamma_theta) * theta, phi - gamma_phi * theta);
    const double alpha_z = dual_limit(step);
    const Vec& dy = step.dy;
    const Vec& dzl = step.dzl;
    const Vec& dzu = step.dzu;
    const Vec& dzs = step.dzs;
    last_alpha = alpha;
    x = x_trial;
    s = s_trial;
    c = c_trial;
    f = f_trial;
    y += alpha * dy;
    zl += alpha_z * dzl;
    zu += alpha_z * dzu;
    zs += alpha_z * dzs;

    // Keep bound multipliers near the central path.
    for (std::size_t p : bounds_.lower_vars) {
      const double d = x_free(x, p) - lo(p);
      zl[p] = std::clamp(zl[p], mu / (kappa_sigma * d), kappa_sigma * mu / d);
    }
    for (std::size_t p : bounds_.upper_vars) {
      const double d = up(p) - x_free(x, p);
      zu[p] = std::clamp(zu[p], mu / (kappa_sigma * d), kappa_sigma * mu / d);
    }
    for (Eigen::Index k = 0; k < n_ineq; ++k) zs[k] = std::clamp(zs[k], mu / (kappa_sigma * s[k]), kappa_sigma * mu / s[k]);
  }
}

}  // namespace

SolveReport solve(const NlpProblem& problem, const SolverOptions& options) {
  InteriorPoint ip(problem, options);
  return ip.run();
}

}  // namespace tscopf::nlp
