#include <cmath>

#include "tscopf/errors.hpp"
#include "tscopf/swing_dynamics.hpp"
#include "trig_term.hpp"

namespace tscopf {

using detail::emit_derivatives;
using detail::TrigTerm;
using nlp::ConstraintBlock;
using nlp::ConstraintKind;
using nlp::Evaluation;

TimeGrid make_grid(const ContingencySpec& contingency) {
  validate(contingency);
  TimeGrid grid;
  grid.dt = contingency.dt;
  grid.clearing_time = contingency.clearing_time;
  grid.horizon = contingency.horizon;
  grid.steps = *aligned_steps(contingency.horizon, contingency.dt);
  grid.clearing_step = *aligned_steps(contingency.clearing_time, contingency.dt);
  return grid;
}

DynamicIndex add_dynamic_variables(nlp::NlpProblem& problem, const Case& c, const TimeGrid& grid) {
  const std::size_t ng = c.generator_count();
  const auto nt = static_cast<std::size_t>(grid.steps + 1);
  DynamicIndex idx;
  idx.delta.assign(ng, std::vector<std::size_t>(nt));
  idx.domega.assign(ng, std::vector<std::size_t>(nt));
  idx.pele.assign(ng, std::vector<std::size_t>(nt));
  idx.coi.resize(nt);
  constexpr double inf = nlp::infinity;
  // Time-major order keeps each step's unknowns adjacent.
  for (std::size_t t = 0; t < nt; ++t) {
    const std::string ts = std::to_string(t);
    for (std::size_t g = 0; g < ng; ++g) {
      const std::string gs = std::to_string(g + 1);
      idx.delta[g][t] = problem.add_variable("delta[" + gs + "," + ts + "]", -inf, inf);
      idx.domega[g][t] = problem.add_variable("domega[" + gs + "," + ts + "]", -inf, inf);
      idx.pele[g][t] = problem.add_variable("pele[" + gs + "," + ts + "]", -inf, inf);
    }
    idx.coi[t] = problem.add_variable("delta_coi[" + ts + "]", -inf, inf);
  }
  for (std::size_t g = 0; g < ng; ++g) {
    idx.pmec.push_back(problem.add_variable("pmec[" + std::to_string(g + 1) + "]", -inf, inf));
  }
  return idx;
}

void flat_dynamic_start(nlp::NlpProblem& problem, const Case& c, const DynamicIndex& idx, const TimeGrid& grid,
                        const std::vector<double>& delta0, const std::vector<double>& p) {
  double h_sum = 0.0, coi = 0.0;
  for (std::size_t g = 0; g < c.generator_count(); ++g) {
    h_sum += c.generators[g].h;
    coi += c.generators[g].h * delta0[g];
  }
  coi /= h_sum;
  for (std::size_t g = 0; g < c.generator_count(); ++g) {
    problem.set_start(idx.pmec[g], p[g]);
    for (long t = 0; t <= grid.steps; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      problem.set_start(idx.delta[g][ti], delta0[g]);
      problem.set_start(idx.domega[g][ti], 0.0);
      problem.set_start(idx.pele[g][ti], p[g]);
    }
  }
  for (long t = 0; t <= grid.steps; ++t) problem.set_start(idx.coi[static_cast<std::size_t>(t)], coi);
}

namespace {

std::string step_label(const std::string& name, std::size_t g, std::size_t t) {
  return name + "[G" + std::to_string(g + 1) + ", t=" + std::to_string(t) + "]";
}

class SwingAngleBlock final : public ConstraintBlock {
 public:
  SwingAngleBlock(const Case& c, const TimeGrid& grid, const DynamicIndex& idx)
      : ConstraintBlock("swing_angle", ConstraintKind::equality,
                        c.generator_count() * static_cast<std::size_t>(grid.steps)),
        idx_(idx),
        factor_(c.omega_syn * grid.dt / 2.0),
        ng_(c.generator_count()) {}

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    const std::size_t nt = idx_.coi.size();
    for (std::size_t t = 1; t < nt; ++t) {
      for (std::size_t g = 0; g < ng_; ++g) {
        const std::size_t r = (t - 1) * ng_ + g;
        const auto& d = idx_.delta[g];
        const auto& w = idx_.domega[g];
        out.add_residual(r, x[d[t]] - x[d[t - 1]] - factor_ * (x[w[t]] + x[w[t - 1]]));
        if (out.wants_jacobian()) {
          out.add_jacobian(r, d[t], 1.0);
          out.add_jacobian(r, d[t - 1], -1.0);
          out.add_jacobian(r, w[t], -factor_);
          out.add_jacobian(r, w[t - 1], -factor_);
        }
      }
    }
  }

  std::string row_label(std::size_t row) const override { return step_label(name(), row % ng_, row / ng_ + 1); }

 private:
  DynamicIndex idx_;
  double factor_;
  std::size_t ng_;
};

class SwingSpeedBlock final : public ConstraintBlock {
 public:
  SwingSpeedBlock(const Case& c, const TimeGrid& grid, const DynamicIndex& idx)
      : ConstraintBlock("swing_speed", ConstraintKind::equality,
                        c.generator_count() * static_cast<std::size_t>(grid.steps)),
        idx_(idx),
        ng_(c.generator_count()) {
    for (const auto& g : c.generators) {
      k_.push_back(grid.dt / (4.0 * g.h));
      damping_.push_back(g.d * grid.dt / (4.0 * g.h));
    }
  }

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    const std::size_t nt = idx_.coi.size();
    for (std::size_t t = 1; t < nt; ++t) {
      for (std::size_t g = 0; g < ng_; ++g) {
        const std::size_t r = (t - 1) * ng_ + g;
        const auto& w = idx_.domega[g];
        const auto& pe = idx_.pele[g];
        const double k = k_[g];
        const double dk = damping_[g];
        out.add_residual(r, x[w[t]] * (1.0 + dk) - x[w[t - 1]] * (1.0 - dk) -
                                k * (2.0 * x[idx_.pmec[g]] - x[pe[t]] - x[pe[t - 1]]));
        if (out.wants_jacobian()) {
          out.add_jacobian(r, w[t], 1.0 + dk);
          out.add_jacobian(r, w[t - 1], -(1.0 - dk));
          out.add_jacobian(r, idx_.pmec[g], -2.0 * k);
          out.add_jacobian(r, pe[t], k);
          out.add_jacobian(r, pe[t - 1], k);
        }
      }
    }
  }

  std::string row_label(std::size_t row) const override { return step_label(name(), row % ng_, row / ng_ + 1); }

 private:
  DynamicIndex idx_;
  std::size_t ng_;
  std::vector<double> k_;
  std::vector<double> damping_;
};

class ElectricalPowerBlock final : public ConstraintBlock {
 public:
  ElectricalPowerBlock(const Case& c, const StageNetworks& networks, const TimeGrid& grid, const DynamicIndex& idx,
                       std::vector<std::size_t> e_vars)
      : ConstraintBlock("electrical_power", ConstraintKind::equality,
                        c.generator_count() * static_cast<std::size_t>(grid.steps + 1)),
        idx_(idx),
        e_(std::move(e_vars)),
        ng_(c.generator_count()),
        during_(networks.during),
        post_(networks.post),
        grid_(grid) {}

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    const std::size_t nt = idx_.coi.size();
    for (std::size_t t = 0; t < nt; ++t) {
      const ReducedNetwork& net =
          grid_.stage_of(static_cast<long>(t)) == NetworkStage::during_fault ? during_ : post_;
      for (std::size_t g = 0; g < ng_; ++g) {
        const std::size_t r = t * ng_ + g;
        const auto gi = static_cast<Eigen::Index>(g);
        out.add_residual(r, x[idx_.pele[g][t]]);
        if (out.wants_jacobian()) out.add_jacobian(r, idx_.pele[g][t], 1.0);

        const double eg = x[e_[g]];
        const double ggg = net.g_red(gi, gi);
        out.add_residual(r, -eg * eg * ggg);
        if (out.wants_jacobian()) out.add_jacobian(r, e_[g], -2.0 * eg * ggg);
        if (out.wants_hessian()) out.add_hessian(r, e_[g], e_[g], -2.0 * ggg);

        for (std::size_t i = 0; i < ng_; ++i) {
          if (i == g) continue;
          const auto ii = static_cast<Eigen::Index>(i);
          const TrigTerm term(eg, x[e_[i]], x[idx_.delta[g][t]], x[idx_.delta[i][t]], net.g_red(gi, ii),
                              net.b_red(gi, ii));
          out.add_residual(r, -term.value);
          emit_derivatives<4>(out, r, {e_[g], e_[i], idx_.delta[g][t], idx_.delta[i][t]}, term.grad, term.hess,
                              -1.0);
        }
      }
    }
  }

  std::string row_label(std::size_t row) const override { return step_label(name(), row % ng_, row / ng_); }

 private:
  DynamicIndex idx_;
  std::vector<std::size_t> e_;
  std::size_t ng_;
  ReducedNetwork during_;
  ReducedNetwork post_;
  TimeGrid grid_;
};

class CoiDefinitionBlock final : public ConstraintBlock {
 public:
  CoiDefinitionBlock(const Case& c, const DynamicIndex& idx)
      : ConstraintBlock("coi_definition", ConstraintKind::equality, idx.coi.size()), idx_(idx) {
    double total = 0.0;
    for (const auto& g : c.generators) total += g.h;
    for (const auto& g : c.generators) weight_.push_back(g.h / total);
  }

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t t = 0; t < idx_.coi.size(); ++t) {
      out.add_residual(t, x[idx_.coi[t]]);
      if (out.wants_jacobian()) out.add_jacobian(t, idx_.coi[t], 1.0);
      for (std::size_t g = 0; g < weight_.size(); ++g) {
        out.add_residual(t, -weight_[g] * x[idx_.delta[g][t]]);
        if (out.wants_jacobian()) out.add_jacobian(t, idx_.delta[g][t], -weight_[g]);
      }
    }
  }

  std::string row_label(std::size_t row) const override { return name() + "[t=" + std::to_string(row) + "]"; }

 private:
  DynamicIndex idx_;
  std::vector<double> weight_;
};

/// Rows 2*(t*ng + g) and 2*(t*ng + g) + 1: upper and lower COI-relative limit.
class CoiLimitBlock final : public ConstraintBlock {
 public:
  CoiLimitBlock(const Case& c, const DynamicIndex& idx, double limit)
      : ConstraintBlock("coi_angle_limit", ConstraintKind::inequality, 2 * c.generator_count() * idx.coi.size()),
        idx_(idx),
        ng_(c.generator_count()),
        limit_(limit) {}

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t t = 0; t < idx_.coi.size(); ++t) {
      for (std::size_t g = 0; g < ng_; ++g) {
        const std::size_t r = 2 * (t * ng_ + g);
        const double rel = x[idx_.delta[g][t]] - x[idx_.coi[t]];
        out.add_residual(r, rel - limit_);
        out.add_residual(r + 1, -limit_ - rel);
        if (out.wants_jacobian()) {
          out.add_jacobian(r, idx_.delta[g][t], 1.0);
          out.add_jacobian(r, idx_.coi[t], -1.0);
          out.add_jacobian(r + 1, idx_.delta[g][t], -1.0);
          out.add_jacobian(r + 1, idx_.coi[t], 1.0);
        }
      }
    }
  }

  std::string row_label(std::size_t row) const override {
    const std::size_t k = row / 2;
    return step_label(name(), k % ng_, k / ng_) + (row % 2 == 0 ? " upper" : " lower");
  }

 private:
  DynamicIndex idx_;
  std::size_t ng_;
  double limit_;
};

class InitialLinkBlock final : public ConstraintBlock {
 public:
  InitialLinkBlock(const SteadyIndex& steady, const DynamicIndex& idx)
      : ConstraintBlock("initial_conditions", ConstraintKind::equality, 3 * idx.pmec.size()) {
    for (std::size_t g = 0; g < idx.pmec.size(); ++g) {
      pairs_.push_back({idx.delta[g][0], steady.delta0[g]});
      pairs_.push_back({idx.domega[g][0], steady.domega0[g]});
      pairs_.push_back({idx.pmec[g], steady.p[g]});
    }
  }

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t r = 0; r < pairs_.size(); ++r) {
      const auto [a, b] = pairs_[r];
      out.add_residual(r, x[a] - x[b]);
      if (out.wants_jacobian()) {
        out.add_jacobian(r, a, 1.0);
        out.add_jacobian(r, b, -1.0);
      }
    }
  }

  std::string row_label(std::size_t row) const override {
    static const char* what[] = {"delta", "domega", "pmec"};
    return name() + "[G" + std::to_string(row / 3 + 1) + " " + what[row % 3] + "]";
  }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

}  // namespace

std::vector<std::unique_ptr<ConstraintBlock>> build_trapezoidal_swing(const Case& c, const TimeGrid& grid,
                                                                      const DynamicIndex& idx) {
  std::vector<std::unique_ptr<ConstraintBlock>> out;
  out.push_back(std::make_unique<SwingAngleBlock>(c, grid, idx));
  out.push_back(std::make_unique<SwingSpeedBlock>(c, grid, idx));
  return out;
}

std::unique_ptr<ConstraintBlock> build_electrical_power(const Case& c, const StageNetworks& networks,
                                                        const TimeGrid& grid, const DynamicIndex& idx,
                                                        const std::vector<std::size_t>& e_vars) {
  if (networks.during.n() != c.generator_count() || networks.post.n() != c.generator_count()) {
    throw DomainError("reduced networks do not match the generator count");
  }
  return std::make_unique<ElectricalPowerBlock>(c, networks, grid, idx, e_vars);
}

std::vector<std::unique_ptr<ConstraintBlock>> build_coi_constraints(const Case& c, const TimeGrid& /*grid*/,
                                                                    const DynamicIndex& idx, double delta_limit) {
  if (!(delta_limit > 0)) throw DomainError("rotor-angle limit must be positive");
  std::vector<std::unique_ptr<ConstraintBlock>> out;
  out.push_back(std::make_unique<CoiDefinitionBlock>(c, idx));
  out.push_back(std::make_unique<CoiLimitBlock>(c, idx, delta_limit));
  return out;
}

std::unique_ptr<ConstraintBlock> link_initial_conditions(const SteadyIndex& steady, const DynamicIndex& idx) {
  if (!steady.has_internal_state()) throw std::logic_error("initial-condition link needs internal-state variables");
  return std::make_unique<InitialLinkBlock>(steady, idx);
}

std::vector<double> electrical_power(const ReducedNetwork& net, const std::vector<double>& e,
                                     const std::vector<double>& delta) {
  const std::size_t n = e.size();
  std::vector<double> p(n, 0.0);
  for (std::size_t g = 0; g < n; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double dd = delta[g] - delta[i];
      p[g] += e[i] * (net.g_red(gi, ii) * std::cos(dd) + net.b_red(gi, ii) * std::sin(dd));
    }
    p[g] *= e[g];
  }
  return p;
}

}  // namespace tscopf
