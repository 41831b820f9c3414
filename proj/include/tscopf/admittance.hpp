#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"

namespace tscopf {

using Complex = std::complex<double>;

/// Dense complex nodal admittance matrix (p.u.). Dense is deliberate: the
/// systems in scope have at most a few dozen nodes and every reduction is
/// O(n^3) in the bus count.
struct AdmittanceMatrix {
  Eigen::MatrixXcd entries;

  std::size_t n() const { return static_cast<std::size_t>(entries.rows()); }
  Complex operator()(std::size_t i, std::size_t j) const {
    return entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

enum class NetworkStage { pre_fault, during_fault, post_fault };

const char* to_string(NetworkStage stage);

/// Kron-reduced network over generator internal nodes.
struct ReducedNetwork {
  NetworkStage stage = NetworkStage::pre_fault;
  Eigen::MatrixXcd y_red;
  Eigen::MatrixXd g_red;
  Eigen::MatrixXd b_red;

  std::size_t n() const { return static_cast<std::size_t>(y_red.rows()); }
};

/// How constant-power loads become constant admittances.
struct LoadVoltageAssumption {
  enum class Mode { flat_one_pu, from_solution };
  Mode mode = Mode::flat_one_pu;
  /// Per-bus voltage magnitude, indexed like Case::buses; used by from_solution.
  std::vector<double> voltages;

  static LoadVoltageAssumption flat() { return {}; }
  static LoadVoltageAssumption from_voltages(std::vector<double> v) {
    return {Mode::from_solution, std::move(v)};
  }
};

struct StageNetworks {
  ReducedNetwork during;
  ReducedNetwork post;
};

/// Pi-model bus admittance matrix including bus shunts and off-nominal taps.
AdmittanceMatrix build_ybus(const Case& c);

/// Copy of y with `shunt` added to diagonal entry (bus_index, bus_index).
AdmittanceMatrix apply_fault(const AdmittanceMatrix& y, std::size_t bus_index,
                             Complex shunt = Complex{1e6, 0.0});

/// Case without the first branch joining `from` and `to` (either orientation).
Case remove_branch(const Case& c, int from, int to);

/// Constant admittance drawing (p + jq) at voltage magnitude v: (p - jq) / v^2.
Complex load_to_admittance(double p, double q, double v);

/// Builds the (n_buses + n_gens) matrix with loads and generator transient
/// reactances included; generator internal nodes come after the buses.
AdmittanceMatrix augment(const AdmittanceMatrix& y, const Case& c,
                         const LoadVoltageAssumption& assumption);

/// Schur complement eliminating the first n_buses nodes of `aug`.
ReducedNetwork kron_reduce(const AdmittanceMatrix& aug, std::size_t n_buses, std::size_t n_gens,
                           NetworkStage stage = NetworkStage::pre_fault);

/// Reduced network of the intact system.
ReducedNetwork build_pre_fault_network(const Case& c, const LoadVoltageAssumption& assumption);

/// During-fault and post-fault reduced networks for one contingency.
StageNetworks build_stage_networks(const Case& c, const ContingencySpec& contingency,
                                   const LoadVoltageAssumption& assumption);

}  // namespace tscopf
