#include <cmath>
#include <complex>
#include <numbers>

#include "tscopf/admittance.hpp"
#include "tscopf/opf_steady.hpp"
#include "trig_term.hpp"

namespace tscopf {

using detail::emit_derivatives;
using detail::TrigTerm;
using nlp::ConstraintBlock;
using nlp::ConstraintKind;
using nlp::Evaluation;

SteadyIndex add_steady_variables(nlp::NlpProblem& problem, const Case& c, bool internal_state) {
  SteadyIndex idx;
  const std::size_t slack = c.slack_index();
  for (std::size_t k = 0; k < c.bus_count(); ++k) {
    const auto& b = c.buses[k];
    const std::string id = std::to_string(b.id);
    idx.v.push_back(problem.add_variable("V[" + id + "]", b.v_min, b.v_max, 1.0));
  }
  for (std::size_t k = 0; k < c.bus_count(); ++k) {
    const auto& b = c.buses[k];
    const std::string id = std::to_string(b.id);
    if (k == slack) {
      idx.theta.push_back(problem.add_variable("theta[" + id + "]", 0.0, 0.0, 0.0));
    } else {
      idx.theta.push_back(problem.add_variable("theta[" + id + "]", b.theta_min, b.theta_max, 0.0));
    }
  }
  for (std::size_t g = 0; g < c.generator_count(); ++g) {
    const auto& gen = c.generators[g];
    const std::string id = std::to_string(g + 1);
    idx.p.push_back(problem.add_variable("P[" + id + "]", gen.p_min, gen.p_max, 0.5 * (gen.p_min + gen.p_max)));
  }
  for (std::size_t g = 0; g < c.generator_count(); ++g) {
    const auto& gen = c.generators[g];
    const std::string id = std::to_string(g + 1);
    idx.q.push_back(problem.add_variable("Q[" + id + "]", gen.q_min, gen.q_max, 0.5 * (gen.q_min + gen.q_max)));
  }
  if (internal_state) {
    for (std::size_t g = 0; g < c.generator_count(); ++g) {
      const auto& gen = c.generators[g];
      const std::string id = std::to_string(g + 1);
      idx.e.push_back(problem.add_variable("E[" + id + "]", gen.e_min, gen.e_max, 1.0));
      idx.delta0.push_back(problem.add_variable("delta0[" + id + "]", -nlp::infinity, nlp::infinity, 0.0));
      idx.domega0.push_back(problem.add_variable("domega0[" + id + "]", 0.0, 0.0, 0.0));
    }
  }
  return idx;
}

void warm_start(nlp::NlpProblem& problem, const SteadyIndex& idx, const DispatchSolution& start) {
  for (std::size_t k = 0; k < idx.v.size(); ++k) {
    problem.set_start(idx.v[k], start.v[k]);
    problem.set_start(idx.theta[k], start.theta[k]);
  }
  for (std::size_t g = 0; g < idx.p.size(); ++g) {
    problem.set_start(idx.p[g], start.p[g]);
    problem.set_start(idx.q[g], start.q[g]);
    if (idx.has_internal_state() && g < start.e.size()) {
      problem.set_start(idx.e[g], start.e[g]);
      problem.set_start(idx.delta0[g], start.delta0[g]);
    }
  }
}

namespace {

class CostObjective final : public ConstraintBlock {
 public:
  CostObjective(const Case& c, const SteadyIndex& idx)
      : ConstraintBlock("objective", ConstraintKind::equality, 1), p_(idx.p) {
    for (const auto& g : c.generators) coeff_.push_back({g.cost_quadratic, g.cost, g.cost_constant});
  }

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t g = 0; g < p_.size(); ++g) {
      const double pg = x[p_[g]];
      const auto& [c2, c1, c0] = coeff_[g];
      out.add_residual(0, c2 * pg * pg + c1 * pg + c0);
      if (out.wants_jacobian()) out.add_jacobian(0, p_[g], 2.0 * c2 * pg + c1);
      if (out.wants_hessian()) out.add_hessian(0, p_[g], p_[g], 2.0 * c2);
    }
  }

 private:
  std::vector<std::size_t> p_;
  std::vector<std::array<double, 3>> coeff_;
};

struct Neighbour {
  std::size_t bus;
  double g;
  double b;
};

/// Bus injection balance: sum of generation - load - V_k * sum_m V_m (...) = 0.
class BalanceBlock final : public ConstraintBlock {
 public:
  BalanceBlock(const Case& c, const SteadyIndex& idx, bool reactive)
      : ConstraintBlock(reactive ? "reactive_balance" : "active_balance", ConstraintKind::equality, c.bus_count()),
        reactive_(reactive),
        v_(idx.v),
        theta_(idx.theta) {
    const AdmittanceMatrix y = build_ybus(c);
    const std::size_t n = c.bus_count();
    neighbours_.resize(n);
    self_.resize(n);
    gens_.resize(n);
    demand_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      self_[k] = y(k, k);
      for (std::size_t m = 0; m < n; ++m) {
        if (m != k && y(k, m) != Complex{}) neighbours_[k].push_back({m, y(k, m).real(), y(k, m).imag()});
      }
    }
    for (std::size_t g = 0; g < c.generator_count(); ++g) {
      gens_[c.bus_index(c.generators[g].bus)].push_back(reactive ? idx.q[g] : idx.p[g]);
    }
    for (const auto& l : c.loads) demand_[c.bus_index(l.bus)] += reactive ? l.q : l.p;
    for (const auto& b : c.buses) labels_.push_back(std::to_string(b.id));
  }

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t k = 0; k < v_.size(); ++k) {
      for (std::size_t var : gens_[k]) {
        out.add_residual(k, x[var]);
        if (out.wants_jacobian()) out.add_jacobian(k, var, 1.0);
      }
      out.add_residual(k, -demand_[k]);

      const double vk = x[v_[k]];
      // Self term: V_k^2 G_kk (active) or -V_k^2 B_kk (reactive).
      const double self = reactive_ ? -self_[k].imag() : self_[k].real();
      out.add_residual(k, -vk * vk * self);
      if (out.wants_jacobian()) out.add_jacobian(k, v_[k], -2.0 * vk * self);
      if (out.wants_hessian()) out.add_hessian(k, v_[k], v_[k], -2.0 * self);

      for (const auto& nb : neighbours_[k]) {
        const double alpha = reactive_ ? -nb.b : nb.g;
        const double beta = reactive_ ? nb.g : nb.b;
        const TrigTerm t(vk, x[v_[nb.bus]], x[theta_[k]], x[theta_[nb.bus]], alpha, beta);
        out.add_residual(k, -t.value);
        emit_derivatives<4>(out, k, {v_[k], v_[nb.bus], theta_[k], theta_[nb.bus]}, t.grad, t.hess, -1.0);
      }
    }
  }

  std::string row_label(std::size_t row) const override { return name() + "[bus " + labels_[row] + "]"; }

 private:
  bool reactive_;
  std::vector<std::size_t> v_;
  std::vector<std::size_t> theta_;
  std::vector<std::vector<Neighbour>> neighbours_;
  std::vector<Complex> self_;
  std::vector<std::vector<std::size_t>> gens_;
  std::vector<double> demand_;
  std::vector<std::string> labels_;
};

/// Pi-model coefficients of one branch end: S = V_a^2 conj(Y_aa) + V_a V_b e^{j(ta-tb)} conj(Y_ab).
struct EndCoefficients {
  Complex y_aa;
  Complex y_ab;
};

EndCoefficients end_coefficients(const Branch& br, bool to_end) {
  const Complex ys = 1.0 / Complex{br.r, br.x};
  const Complex half{0.0, br.b_charging / 2.0};
  if (to_end) return {ys + half, -ys / br.tap};
  return {(ys + half) / (br.tap * br.tap), -ys / br.tap};
}

struct FlowDerivatives {
  double p, q;
  std::array<double, 4> gp, gq;
  std::array<std::array<double, 4>, 4> hp, hq;
};

FlowDerivatives flow_derivatives(const EndCoefficients& k, double va, double vb, double ta, double tb) {
  const TrigTerm tp(va, vb, ta, tb, k.y_ab.real(), k.y_ab.imag());
  const TrigTerm tq(va, vb, ta, tb, -k.y_ab.imag(), k.y_ab.real());
  FlowDerivatives f{};
  f.p = va * va * k.y_aa.real() + tp.value;
  f.q = -va * va * k.y_aa.imag() + tq.value;
  f.gp = tp.grad;
  f.gq = tq.grad;
  f.gp[0] += 2.0 * va * k.y_aa.real();
  f.gq[0] -= 2.0 * va * k.y_aa.imag();
  f.hp = tp.hess;
  f.hq = tq.hess;
  f.hp[0][0] += 2.0 * k.y_aa.real();
  f.hq[0][0] -= 2.0 * k.y_aa.imag();
  return f;
}

class FlowLimitBlock final : public ConstraintBlock {
 public:
  struct Row {
    EndCoefficients coeff;
    std::array<std::size_t, 4> vars;  // Va, Vb, ta, tb
    double s_max_sq;
    std::string label;
  };

  explicit FlowLimitBlock(std::vector<Row> rows)
      : ConstraintBlock("branch_flow_limit", ConstraintKind::inequality, rows.size()), rows_(std::move(rows)) {}

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      const auto f = flow_derivatives(row.coeff, x[row.vars[0]], x[row.vars[1]], x[row.vars[2]], x[row.vars[3]]);
      out.add_residual(r, f.p * f.p + f.q * f.q - row.s_max_sq);
      std::array<double, 4> grad{};
      std::array<std::array<double, 4>, 4> hess{};
      for (std::size_t i = 0; i < 4; ++i) {
        grad[i] = 2.0 * (f.p * f.gp[i] + f.q * f.gq[i]);
        for (std::size_t j = 0; j < 4; ++j) {
          hess[i][j] = 2.0 * (f.gp[i] * f.gp[j] + f.p * f.hp[i][j] + f.gq[i] * f.gq[j] + f.q * f.hq[i][j]);
        }
      }
      emit_derivatives<4>(out, r, row.vars, grad, hess, 1.0);
    }
  }

  std::string row_label(std::size_t row) const override { return name() + "[" + rows_[row].label + "]"; }

 private:
  std::vector<Row> rows_;
};

class AngleDifferenceBlock final : public ConstraintBlock {
 public:
  struct Row {
    std::size_t from, to;
    double sign;   // +1: (ta - tb) - max <= 0, -1: min - (ta - tb) <= 0
    double bound;
    std::string label;
  };

  explicit AngleDifferenceBlock(std::vector<Row> rows)
      : ConstraintBlock("branch_angle_difference", ConstraintKind::inequality, rows.size()), rows_(std::move(rows)) {}

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      out.add_residual(r, row.sign * (x[row.from] - x[row.to] - row.bound));
      if (out.wants_jacobian()) {
        out.add_jacobian(r, row.from, row.sign);
        out.add_jacobian(r, row.to, -row.sign);
      }
    }
  }

  std::string row_label(std::size_t row) const override { return name() + "[" + rows_[row].label + "]"; }

 private:
  std::vector<Row> rows_;
};

/// P x' - E V sin(delta - theta) = 0 and Q x' + V^2 - E V cos(delta - theta) = 0.
class GeneratorInitBlock final : public ConstraintBlock {
 public:
  GeneratorInitBlock(const Case& c, const SteadyIndex& idx)
      : ConstraintBlock("generator_init", ConstraintKind::equality, 2 * c.generator_count()), idx_(idx) {
    for (const auto& g : c.generators) {
      xd_.push_back(g.x_d_prime);
      bus_.push_back(c.bus_index(g.bus));
    }
  }

  void evaluate(std::span<const double> x, Evaluation& out) const override {
    for (std::size_t g = 0; g < xd_.size(); ++g) {
      const std::size_t k = bus_[g];
      const std::array<std::size_t, 4> vars{idx_.e[g], idx_.v[k], idx_.delta0[g], idx_.theta[k]};
      const double e = x[vars[0]], v = x[vars[1]], d = x[vars[2]], th = x[vars[3]];

      const std::size_t rp = 2 * g;
      const TrigTerm ts(e, v, d, th, 0.0, 1.0);
      out.add_residual(rp, xd_[g] * x[idx_.p[g]] - ts.value);
      if (out.wants_jacobian()) out.add_jacobian(rp, idx_.p[g], xd_[g]);
      emit_derivatives<4>(out, rp, vars, ts.grad, ts.hess, -1.0);

      const std::size_t rq = 2 * g + 1;
      const TrigTerm tc(e, v, d, th, 1.0, 0.0);
      out.add_residual(rq, xd_[g] * x[idx_.q[g]] + v * v - tc.value);
      if (out.wants_jacobian()) {
        out.add_jacobian(rq, idx_.q[g], xd_[g]);
        out.add_jacobian(rq, idx_.v[k], 2.0 * v);
      }
      if (out.wants_hessian()) out.add_hessian(rq, idx_.v[k], idx_.v[k], 2.0);
      emit_derivatives<4>(out, rq, vars, tc.grad, tc.hess, -1.0);
    }
  }

  std::string row_label(std::size_t row) const override {
    return name() + "[G" + std::to_string(row / 2 + 1) + (row % 2 == 0 ? " active]" : " reactive]");
  }

 private:
  SteadyIndex idx_;
  std::vector<double> xd_;
  std::vector<std::size_t> bus_;
};

}  // namespace

std::unique_ptr<ConstraintBlock> build_objective(const Case& c, const SteadyIndex& idx) {
  return std::make_unique<CostObjective>(c, idx);
}

std::vector<std::unique_ptr<ConstraintBlock>> build_power_balance(const Case& c, const SteadyIndex& idx) {
  std::vector<std::unique_ptr<ConstraintBlock>> out;
  out.push_back(std::make_unique<BalanceBlock>(c, idx, false));
  out.push_back(std::make_unique<BalanceBlock>(c, idx, true));
  return out;
}

std::vector<std::unique_ptr<ConstraintBlock>> build_operating_limits(const Case& c, const SteadyIndex& idx) {
  std::vector<FlowLimitBlock::Row> flows;
  std::vector<AngleDifferenceBlock::Row> angles;
  const double full_turn = 2.0 * std::numbers::pi;
  for (const auto& br : c.branches) {
    const std::size_t a = c.bus_index(br.from);
    const std::size_t b = c.bus_index(br.to);
    const std::string name = std::to_string(br.from) + "-" + std::to_string(br.to);
    if (std::isfinite(br.s_max)) {
      const double s2 = br.s_max * br.s_max;
      flows.push_back({end_coefficients(br, false), {idx.v[a], idx.v[b], idx.theta[a], idx.theta[b]}, s2,
                       name + " from end"});
      flows.push_back({end_coefficients(br, true), {idx.v[b], idx.v[a], idx.theta[b], idx.theta[a]}, s2,
                       name + " to end"});
    }
    if (br.theta_diff_max < full_turn) {
      angles.push_back({idx.theta[a], idx.theta[b], 1.0, br.theta_diff_max, name + " max"});
    }
    if (br.theta_diff_min > -full_turn) {
      angles.push_back({idx.theta[a], idx.theta[b], -1.0, br.theta_diff_min, name + " min"});
    }
  }
  std::vector<std::unique_ptr<ConstraintBlock>> out;
  if (!flows.empty()) out.push_back(std::make_unique<FlowLimitBlock>(std::move(flows)));
  if (!angles.empty()) out.push_back(std::make_unique<AngleDifferenceBlock>(std::move(angles)));
  return out;
}

std::unique_ptr<ConstraintBlock> build_generator_init(const Case& c, const SteadyIndex& idx) {
  if (!idx.has_internal_state()) throw std::logic_error("generator init needs internal-state variables");
  return std::make_unique<GeneratorInitBlock>(c, idx);
}

BranchFlow branch_flow(const Branch& br, double v_from, double v_to, double theta_from, double theta_to,
                       bool to_end) {
  const auto k = end_coefficients(br, to_end);
  const auto f = to_end ? flow_derivatives(k, v_to, v_from, theta_to, theta_from)
                        : flow_derivatives(k, v_from, v_to, theta_from, theta_to);
  return {f.p, f.q};
}

void generator_internal_state(const Case& c, const std::vector<double>& v, const std::vector<double>& theta,
                              const std::vector<double>& p, const std::vector<double>& q, std::vector<double>& e,
                              std::vector<double>& delta0) {
  const std::size_t ng = c.generator_count();
  e.resize(ng);
  delta0.resize(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    const std::size_t k = c.bus_index(c.generators[g].bus);
    const Complex vt = std::polar(v[k], theta[k]);
    const Complex current = std::conj(Complex{p[g], q[g]} / vt);
    const Complex internal = vt + Complex{0.0, c.generators[g].x_d_prime} * current;
    e[g] = std::abs(internal);
    delta0[g] = std::arg(internal);
  }
}

DispatchSolution extract_dispatch(const Case& c, const SteadyIndex& idx, std::span<const double> x) {
  DispatchSolution d;
  for (std::size_t k = 0; k < idx.v.size(); ++k) {
    d.v.push_back(x[idx.v[k]]);
    d.theta.push_back(x[idx.theta[k]]);
  }
  for (std::size_t g = 0; g < idx.p.size(); ++g) {
    d.p.push_back(x[idx.p[g]]);
    d.q.push_back(x[idx.q[g]]);
  }
  if (idx.has_internal_state()) {
    for (std::size_t g = 0; g < idx.e.size(); ++g) {
      d.e.push_back(x[idx.e[g]]);
      d.delta0.push_back(x[idx.delta0[g]]);
    }
  } else {
    generator_internal_state(c, d.v, d.theta, d.p, d.q, d.e, d.delta0);
  }
  for (std::size_t g = 0; g < d.p.size(); ++g) {
    const auto& gen = c.generators[g];
    d.objective += gen.cost_quadratic * d.p[g] * d.p[g] + gen.cost * d.p[g] + gen.cost_constant;
  }
  return d;
}

OpfResult solve_opf(const Case& c, const OpfOptions& options) {
  validate(c);
  nlp::NlpProblem problem;
  const SteadyIndex idx = add_steady_variables(problem, c, options.internal_state);
  problem.set_objective(build_objective(c, idx));
  for (auto& b : build_power_balance(c, idx)) problem.add_block(std::move(b));
  for (auto& b : build_operating_limits(c, idx)) problem.add_block(std::move(b));
  if (options.internal_state) problem.add_block(build_generator_init(c, idx));

  OpfResult result;
  result.report = nlp::solve(problem, options.solver);
  result.dispatch = extract_dispatch(c, idx, result.report.x);
  return result;
}

}  // namespace tscopf
