#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "tscopf/errors.hpp"
#include "tscopf/swing_dynamics.hpp"
#include "tscopf/tdsim.hpp"

namespace tscopf {

const char* to_string(TrajectorySource source) {
  return source == TrajectorySource::optimizer ? "optimizer" : "simulator";
}

std::vector<std::vector<double>> TrajectorySet::coi_relative_delta(const std::vector<double>& inertia) const {
  const std::size_t ng = generator_count();
  if (inertia.size() != ng) throw DomainError("inertia vector does not match the generator count");
  double total = 0.0;
  for (double h : inertia) total += h;
  std::vector<std::vector<double>> rel(ng, std::vector<double>(size()));
  for (std::size_t t = 0; t < size(); ++t) {
    double coi = 0.0;
    for (std::size_t g = 0; g < ng; ++g) coi += inertia[g] * delta[g][t];
    coi /= total;
    for (std::size_t g = 0; g < ng; ++g) rel[g][t] = delta[g][t] - coi;
  }
  return rel;
}

TrajectorySet resample(const TrajectorySet& source, const std::vector<double>& times) {
  if (source.size() == 0) throw DomainError("cannot resample an empty trajectory set");
  TrajectorySet out = source;
  out.times = times;
  const std::size_t ng = source.generator_count();
  out.delta.assign(ng, std::vector<double>(times.size()));
  out.omega.assign(ng, std::vector<double>(times.size()));
  const auto& st = source.times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = std::clamp(times[k], st.front(), st.back());
    auto hi = static_cast<std::size_t>(std::upper_bound(st.begin(), st.end(), t) - st.begin());
    hi = std::clamp<std::size_t>(hi, 1, st.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = st.size() > 1 ? st[hi] - st[lo] : 0.0;
    const double w = span > 0.0 ? (t - st[lo]) / span : 0.0;
    for (std::size_t g = 0; g < ng; ++g) {
      if (st.size() == 1) {
        out.delta[g][k] = source.delta[g][0];
        out.omega[g][k] = source.omega[g][0];
        continue;
      }
      out.delta[g][k] = (1.0 - w) * source.delta[g][lo] + w * source.delta[g][hi];
      out.omega[g][k] = (1.0 - w) * source.omega[g][lo] + w * source.omega[g][hi];
    }
  }
  if (times.size() > 1) out.dt = times[1] - times[0];
  return out;
}

namespace {

/// d P_ele,g / d delta_i on one network.
Eigen::MatrixXd power_angle_jacobian(const ReducedNetwork& net, const std::vector<double>& e,
                                     const Eigen::VectorXd& delta) {
  const auto n = static_cast<Eigen::Index>(e.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index g = 0; g < n; ++g) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == g) continue;
      const double dd = delta[g] - delta[i];
      const double v = e[static_cast<std::size_t>(g)] * e[static_cast<std::size_t>(i)] *
                       (-net.g_red(g, i) * std::sin(dd) + net.b_red(g, i) * std::cos(dd));
      j(g, g) += v;
      j(g, i) -= v;
    }
  }
  return j;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TrajectorySet simulate_networks(const Case& c, const StageNetworks& networks, const std::vector<double>& e,
                                const std::vector<double>& delta0, const std::vector<double>& pmec,
                                const ContingencySpec& contingency, const SimulationOptions& options) {
  const TimeGrid grid = make_grid(contingency);
  const std::size_t ng = c.generator_count();
  const auto n = static_cast<Eigen::Index>(ng);
  if (e.size() != ng || delta0.size() != ng || pmec.size() != ng) {
    throw DomainError("machine state does not match the generator count");
  }

  Eigen::VectorXd k(n), dk(n), pm(n);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = c.generators[g];
    k[static_cast<Eigen::Index>(g)] = grid.dt / (4.0 * gen.h);
    dk[static_cast<Eigen::Index>(g)] = gen.d * grid.dt / (4.0 * gen.h);
    pm[static_cast<Eigen::Index>(g)] = pmec[g];
  }
  const double factor = c.omega_syn * grid.dt / 2.0;

  TrajectorySet out;
  out.dt = grid.dt;
  out.contingency_id = contingency.id;
  out.source = TrajectorySource::simulator;
  const auto nt = static_cast<std::size_t>(grid.steps + 1);
  out.times.resize(nt);
  out.delta.assign(ng, std::vector<double>(nt));
  out.omega.assign(ng, std::vector<double>(nt));

  auto network = [&](long t) -> const ReducedNetwork& {
    return grid.stage_of(t) == NetworkStage::during_fault ? networks.during : networks.post;
  };

  Eigen::VectorXd delta = Eigen::Map<const Eigen::VectorXd>(delta0.data(), n);
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd pe = Eigen::Map<const Eigen::VectorXd>(electrical_power(network(0), e, delta0).data(), n);
  auto store = [&](long t) {
    const auto ti = static_cast<std::size_t>(t);
    out.times[ti] = grid.time(t);
    for (std::size_t g = 0; g < ng; ++g) {
      out.delta[g][ti] = delta[static_cast<Eigen::Index>(g)];
      out.omega[g][ti] = omega[static_cast<Eigen::Index>(g)];
    }
  };
  store(0);

  Eigen::VectorXd x(2 * n), r(2 * n);
  Eigen::MatrixXd jac(2 * n, 2 * n);
  for (long t = 1; t <= grid.steps; ++t) {
    const ReducedNetwork& net = network(t);
    x << delta, omega;
    bool converged = false;
    for (int it = 0; it <= options.max_newton_iterations; ++it) {
      const Eigen::VectorXd dn = x.head(n);
      const Eigen::VectorXd wn = x.tail(n);
      const Eigen::VectorXd pen = Eigen::Map<const Eigen::VectorXd>(electrical_power(net, e, to_std(dn)).data(), n);
      r.head(n) = dn - delta - factor * (wn + omega);
      r.tail(n) = wn.cwiseProduct(Eigen::VectorXd::Ones(n) + dk) - omega.cwiseProduct(Eigen::VectorXd::Ones(n) - dk) -
                  k.cwiseProduct(2.0 * pm - pen - pe);
      if (!r.allFinite()) break;
      if (r.cwiseAbs().maxCoeff() < options.newton_tolerance) {
        converged = true;
        break;
      }
      if (it == options.max_newton_iterations) break;
      jac.setZero();
      jac.topLeftCorner(n, n).setIdentity();
      jac.topRightCorner(n, n) = -factor * Eigen::MatrixXd::Identity(n, n);
      jac.bottomLeftCorner(n, n) = k.asDiagonal() * power_angle_jacobian(net, e, dn);
      jac.bottomRightCorner(n, n) = (Eigen::VectorXd::Ones(n) + dk).asDiagonal();
      x -= jac.partialPivLu().solve(r);
    }
    if (!converged) {
      throw IntegrationError("trapezoidal Newton iteration did not converge at step " + std::to_string(t) +
                                 " (t = " + std::to_string(grid.time(t)) + " s)",
                             static_cast<std::size_t>(t));
    }
    delta = x.head(n);
    omega = x.tail(n);
    // Left-end power for the next step.
    const bool switching = options.event == EventTreatment::split_at_event && t == grid.clearing_step;
    const ReducedNetwork& next = switching ? networks.post : net;
    pe = Eigen::Map<const Eigen::VectorXd>(electrical_power(next, e, to_std(delta)).data(), n);
    store(t);
  }
  return out;
}

TrajectorySet simulate(const Case& c, const DispatchSolution& dispatch, const ContingencySpec& contingency,
                       const LoadVoltageAssumption& assumption, const SimulationOptions& options) {
  validate(c);
  std::vector<double> e, delta0;
  generator_internal_state(c, dispatch.v, dispatch.theta, dispatch.p, dispatch.q, e, delta0);
  const StageNetworks networks = build_stage_networks(c, contingency, assumption);
  return simulate_networks(c, networks, e, delta0, dispatch.p, contingency, options);
}

RefinementResult refine_check(const TrajectorySet& coarse, const TrajectorySet& half, const TrajectorySet& quarter,
                              const std::vector<double>& inertia, double t_begin, double t_end) {
  const std::size_t ng = coarse.generator_count();
  if (half.generator_count() != ng || quarter.generator_count() != ng) {
    throw DomainError("refinement runs have different generator sets");
  }
  if (coarse.contingency_id != half.contingency_id || coarse.contingency_id != quarter.contingency_id) {
    throw DomainError("refinement runs belong to different scenarios");
  }
  auto ratio_ok = [](double a, double b) { return std::abs(a / b - 2.0) < 1e-9; };
  if (!ratio_ok(coarse.dt, half.dt) || !ratio_ok(half.dt, quarter.dt)) {
    throw DomainError("refinement runs must use dt, dt/2 and dt/4");
  }

  const auto rc = coarse.coi_relative_delta(inertia);
  const auto rh = half.coi_relative_delta(inertia);
  const auto rq = quarter.coi_relative_delta(inertia);

  RefinementResult res;
  double diff_ch = 0.0, diff_hq = 0.0;
  std::size_t samples = 0;
  for (std::size_t t = 0; t < coarse.size(); ++t) {
    const double time = coarse.times[t];
    if (time < t_begin - 1e-12 || time > t_end + 1e-12) continue;
    const std::size_t th = 2 * t;
    const std::size_t tq = 4 * t;
    if (tq >= quarter.size() || th >= half.size()) break;
    ++samples;
    for (std::size_t g = 0; g < ng; ++g) {
      diff_ch = std::max({diff_ch, std::abs(rc[g][t] - rh[g][th]), std::abs(coarse.omega[g][t] - half.omega[g][th])});
      diff_hq = std::max({diff_hq, std::abs(rh[g][th] - rq[g][tq]), std::abs(half.omega[g][th] - quarter.omega[g][tq])});
    }
  }
  if (samples == 0) throw DomainError("refinement window contains no coarse grid points");
  res.coarse_difference = diff_ch;
  res.fine_difference = diff_hq;
  if (diff_ch == 0.0 || diff_hq == 0.0) {
    res.order = std::numeric_limits<double>::quiet_NaN();
    res.finite = false;
    res.explanation = "successive runs agree exactly on the window; the order is undefined";
    return res;
  }
  res.order = std::log2(diff_ch / diff_hq);
  res.finite = std::isfinite(res.order);
  res.explanation = "log2 of the ratio of successive max differences over " + std::to_string(samples) + " samples";
  return res;
}

}  // namespace tscopf
