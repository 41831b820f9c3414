#include <cmath>

#include <Eigen/LU>

#include "tscopf/admittance.hpp"
#include "tscopf/errors.hpp"
#include "tscopf/power_flow.hpp"

namespace tscopf {

PowerFlowResult solve_power_flow(const Case& c, const DispatchSolution& start, double tol, int max_iterations) {
  validate(c);
  const std::size_t nb = c.bus_count();
  const std::size_t slack = c.slack_index();
  const Eigen::MatrixXcd y = build_ybus(c).entries;

  std::vector<bool> has_gen(nb, false);
  Eigen::VectorXd p_spec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  Eigen::VectorXd q_load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  for (std::size_t g = 0; g < c.generator_count(); ++g) {
    const std::size_t k = c.bus_index(c.generators[g].bus);
    has_gen[k] = true;
    p_spec[static_cast<Eigen::Index>(k)] += start.p[g];
  }
  Eigen::VectorXd q_spec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  for (const auto& l : c.loads) {
    const auto k = static_cast<Eigen::Index>(c.bus_index(l.bus));
    p_spec[k] -= l.p;
    q_spec[k] -= l.q;
    q_load[k] += l.q;
  }

  // Unknowns: angles of non-slack buses, magnitudes of buses without generators.
  std::vector<std::size_t> ang, mag;
  for (std::size_t k = 0; k < nb; ++k) {
    if (k != slack) ang.push_back(k);
    if (!has_gen[k]) mag.push_back(k);
  }
  const auto na = static_cast<Eigen::Index>(ang.size());
  const auto nm = static_cast<Eigen::Index>(mag.size());

  Eigen::VectorXd vm = Eigen::Map<const Eigen::VectorXd>(start.v.data(), static_cast<Eigen::Index>(nb));
  Eigen::VectorXd va = Eigen::Map<const Eigen::VectorXd>(start.theta.data(), static_cast<Eigen::Index>(nb));

  auto voltages = [&]() {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(nb));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = std::polar(vm[k], va[k]);
    return v;
  };

  PowerFlowResult result;
  for (int it = 0;; ++it) {
    const Eigen::VectorXcd v = voltages();
    const Eigen::VectorXcd current = y * v;
    const Eigen::VectorXcd s = v.cwiseProduct(current.conjugate());
    Eigen::VectorXd f(na + nm);
    for (Eigen::Index i = 0; i < na; ++i) f[i] = s[static_cast<Eigen::Index>(ang[i])].real() - p_spec[static_cast<Eigen::Index>(ang[i])];
    for (Eigen::Index i = 0; i < nm; ++i) f[na + i] = s[static_cast<Eigen::Index>(mag[i])].imag() - q_spec[static_cast<Eigen::Index>(mag[i])];
    result.mismatch = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    result.iterations = it;
    if (result.mismatch < tol) break;
    if (it >= max_iterations || !std::isfinite(result.mismatch)) {
      throw DomainError("power flow did not converge (mismatch " + std::to_string(result.mismatch) + " after " +
                        std::to_string(it) + " iterations)");
    }

    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|).
    const Eigen::VectorXcd vnorm = v.cwiseQuotient(vm.cast<std::complex<double>>());
    const Eigen::MatrixXcd ds_dva = Complex{0.0, 1.0} * v.asDiagonal() *
                                    (Eigen::MatrixXcd(current.asDiagonal()) - y * v.asDiagonal()).conjugate();
    const Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (y * vnorm.asDiagonal()).conjugate() +
                                    Eigen::MatrixXcd(current.conjugate().cwiseProduct(vnorm).asDiagonal());
    Eigen::MatrixXd jac(na + nm, na + nm);
    for (Eigen::Index i = 0; i < na + nm; ++i) {
      const bool p_row = i < na;
      const auto bus = static_cast<Eigen::Index>(p_row ? ang[i] : mag[i - na]);
      for (Eigen::Index j = 0; j < na + nm; ++j) {
        const bool a_col = j < na;
        const auto col = static_cast<Eigen::Index>(a_col ? ang[j] : mag[j - na]);
        const Complex d = a_col ? ds_dva(bus, col) : ds_dvm(bus, col);
        jac(i, j) = p_row ? d.real() : d.imag();
      }
    }
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
    for (Eigen::Index i = 0; i < na; ++i) va[static_cast<Eigen::Index>(ang[i])] += dx[i];
    for (Eigen::Index i = 0; i < nm; ++i) vm[static_cast<Eigen::Index>(mag[i])] += dx[na + i];
  }

  const Eigen::VectorXcd v = voltages();
  const Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
  DispatchSolution& d = result.dispatch;
  d.v.assign(vm.data(), vm.data() + vm.size());
  d.theta.assign(va.data(), va.data() + va.size());
  d.p = start.p;
  d.q.assign(c.generator_count(), 0.0);
  // Bus reactive need (and the slack's active need) is shared among the
  // bus's generators in proportion to the start point's values.
  for (std::size_t k = 0; k < nb; ++k) {
    std::vector<std::size_t> gens;
    double q_start = 0.0, p_start = 0.0;
    for (std::size_t g = 0; g < c.generator_count(); ++g) {
      if (c.bus_index(c.generators[g].bus) == k) {
        gens.push_back(g);
        q_start += start.q[g];
        p_start += start.p[g];
      }
    }
    if (gens.empty()) continue;
    const auto ki = static_cast<Eigen::Index>(k);
    const double q_need = s[ki].imag() + q_load[ki];
    double p_need = p_start;
    if (k == slack) {
      double p_load = 0.0;
      for (const auto& l : c.loads) {
        if (c.bus_index(l.bus) == k) p_load += l.p;
      }
      p_need = s[ki].real() + p_load;
    }
    for (std::size_t g : gens) {
      const double wq = std::abs(q_start) > 1e-12 ? start.q[g] / q_start : 1.0 / static_cast<double>(gens.size());
      const double wp = std::abs(p_start) > 1e-12 ? start.p[g] / p_start : 1.0 / static_cast<double>(gens.size());
      d.q[g] = wq * q_need;
      d.p[g] = wp * p_need;
    }
  }
  generator_internal_state(c, d.v, d.theta, d.p, d.q, d.e, d.delta0);
  d.objective = 0.0;
  for (std::size_t g = 0; g < d.p.size(); ++g) {
    const auto& gen = c.generators[g];
    d.objective += gen.cost_quadratic * d.p[g] * d.p[g] + gen.cost * d.p[g] + gen.cost_constant;
  }
  return result;
}

}  // namespace tscopf
