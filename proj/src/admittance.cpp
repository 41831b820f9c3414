#include <cmath>

#include <Eigen/LU>

#include "tscopf/admittance.hpp"
#include "tscopf/errors.hpp"

namespace tscopf {

const char* to_string(NetworkStage stage) {
  switch (stage) {
    case NetworkStage::pre_fault: return "pre_fault";
    case NetworkStage::during_fault: return "during_fault";
    case NetworkStage::post_fault: return "post_fault";
  }
  return "unknown";
}

AdmittanceMatrix build_ybus(const Case& c) {
  const auto n = static_cast<Eigen::Index>(c.bus_count());
  AdmittanceMatrix y{Eigen::MatrixXcd::Zero(n, n)};
  for (const auto& br : c.branches) {
    const auto k = static_cast<Eigen::Index>(c.bus_index(br.from));
    const auto m = static_cast<Eigen::Index>(c.bus_index(br.to));
    const Complex ys = 1.0 / Complex{br.r, br.x};
    const Complex half_charging{0.0, br.b_charging / 2.0};
    y.entries(k, k) += (ys + half_charging) / (br.tap * br.tap);
    y.entries(m, m) += ys + half_charging;
    y.entries(k, m) -= ys / br.tap;
    y.entries(m, k) -= ys / br.tap;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = c.buses[static_cast<std::size_t>(i)];
    y.entries(i, i) += Complex{b.shunt_g, b.shunt_b};
  }
  return y;
}

AdmittanceMatrix apply_fault(const AdmittanceMatrix& y, std::size_t bus_index, Complex shunt) {
  if (bus_index >= y.n()) {
    throw IndexError("fault bus index " + std::to_string(bus_index) + " outside a " + std::to_string(y.n()) +
                     "-bus network");
  }
  AdmittanceMatrix out = y;
  const auto k = static_cast<Eigen::Index>(bus_index);
  out.entries(k, k) += shunt;
  return out;
}

Case remove_branch(const Case& c, int from, int to) {
  Case out = c;
  for (auto it = out.branches.begin(); it != out.branches.end(); ++it) {
    if ((it->from == from && it->to == to) || (it->from == to && it->to == from)) {
      out.branches.erase(it);
      return out;
    }
  }
  throw IndexError("no branch between buses " + std::to_string(from) + " and " + std::to_string(to));
}

Complex load_to_admittance(double p, double q, double v) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw DomainError("load voltage must be positive, got " + std::to_string(v));
  }
  return Complex{p, -q} / (v * v);
}

AdmittanceMatrix augment(const AdmittanceMatrix& y, const Case& c, const LoadVoltageAssumption& assumption) {
  const std::size_t nb = y.n();
  const std::size_t ng = c.generator_count();
  if (nb != c.bus_count()) throw DomainError("admittance matrix dimension does not match the case");
  if (assumption.mode == LoadVoltageAssumption::Mode::from_solution && assumption.voltages.size() != nb) {
    throw DomainError("from_solution load assumption needs one voltage per bus (" + std::to_string(nb) +
                      "), got " + std::to_string(assumption.voltages.size()));
  }

  const auto n = static_cast<Eigen::Index>(nb + ng);
  AdmittanceMatrix aug{Eigen::MatrixXcd::Zero(n, n)};
  aug.entries.topLeftCorner(y.entries.rows(), y.entries.cols()) = y.entries;

  for (const auto& load : c.loads) {
    const std::size_t k = c.bus_index(load.bus);
    if (load.p == 0.0 && load.q == 0.0) continue;
    const double v =
        assumption.mode == LoadVoltageAssumption::Mode::flat_one_pu ? 1.0 : assumption.voltages[k];
    const auto ki = static_cast<Eigen::Index>(k);
    aug.entries(ki, ki) += load_to_admittance(load.p, load.q, v);
  }

  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = c.generators[g];
    const Complex yg = 1.0 / Complex{0.0, gen.x_d_prime};
    const auto k = static_cast<Eigen::Index>(c.bus_index(gen.bus));
    const auto gi = static_cast<Eigen::Index>(nb + g);
    aug.entries(k, k) += yg;
    aug.entries(gi, gi) = yg;
    aug.entries(k, gi) = -yg;
    aug.entries(gi, k) = -yg;
  }
  return aug;
}

ReducedNetwork kron_reduce(const AdmittanceMatrix& aug, std::size_t n_buses, std::size_t n_gens,
                           NetworkStage stage) {
  if (aug.n() != n_buses + n_gens) throw DomainError("augmented matrix dimension mismatch");
  const auto nb = static_cast<Eigen::Index>(n_buses);
  const auto ng = static_cast<Eigen::Index>(n_gens);
  const Eigen::MatrixXcd y_nn = aug.entries.topLeftCorner(nb, nb);
  const Eigen::MatrixXcd y_ng = aug.entries.topRightCorner(nb, ng);
  const Eigen::MatrixXcd y_gn = aug.entries.bottomLeftCorner(ng, nb);
  const Eigen::MatrixXcd y_gg = aug.entries.bottomRightCorner(ng, ng);

  ReducedNetwork red;
  red.stage = stage;
  if (nb == 0) {
    red.y_red = y_gg;
  } else {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(y_nn);
    // rcond() is an estimate of 1/cond_1.
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
      throw SingularMatrixError("bus block of the augmented admittance matrix is singular (reciprocal condition "
                                "estimate " + std::to_string(rcond) + "); check for an isolated island",
                                rcond);
    }
    red.y_red = y_gg - y_gn * lu.solve(y_ng);
  }
  red.g_red = red.y_red.real();
  red.b_red = red.y_red.imag();
  return red;
}

ReducedNetwork build_pre_fault_network(const Case& c, const LoadVoltageAssumption& assumption) {
  return kron_reduce(augment(build_ybus(c), c, assumption), c.bus_count(), c.generator_count(),
                     NetworkStage::pre_fault);
}

StageNetworks build_stage_networks(const Case& c, const ContingencySpec& contingency,
                                   const LoadVoltageAssumption& assumption) {
  const std::size_t fault_index = c.bus_index(contingency.fault_bus);
  const AdmittanceMatrix intact = build_ybus(c);
  StageNetworks out;
  out.during = kron_reduce(augment(apply_fault(intact, fault_index, Complex{contingency.fault_shunt, 0.0}), c,
                                   assumption),
                           c.bus_count(), c.generator_count(), NetworkStage::during_fault);
  const Case post_case = contingency.cleared_branch
                             ? remove_branch(c, contingency.cleared_branch->first, contingency.cleared_branch->second)
                             : c;
  out.post = kron_reduce(augment(build_ybus(post_case), post_case, assumption), c.bus_count(),
                         c.generator_count(), NetworkStage::post_fault);
  return out;
}

}  // namespace tscopf
