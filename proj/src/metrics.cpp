#include <algorithm>
#include <cmath>
#include <numbers>

#include "tscopf/errors.hpp"
#include "tscopf/metrics.hpp"

namespace tscopf {

const char* to_string(Quantity q) { return q == Quantity::delta ? "delta" : "omega"; }

const char* to_string(AngleReference r) { return r == AngleReference::coi ? "coi" : "absolute"; }

namespace {

double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t) {
  if (times.size() == 1) return values.front();
  auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  hi = std::clamp<std::size_t>(hi, 1, times.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - w) * values[lo] + w * values[hi];
}

std::vector<std::vector<double>> series(const TrajectorySet& s, Quantity quantity, AngleReference reference,
                                        const std::vector<double>& inertia) {
  if (quantity == Quantity::omega) return s.omega;
  return reference == AngleReference::coi ? s.coi_relative_delta(inertia) : s.delta;
}

}  // namespace

std::vector<double> mae(const TrajectorySet& a, const TrajectorySet& b, Quantity quantity, AngleReference reference,
                        const std::vector<double>& inertia) {
  const std::size_t ng = a.generator_count();
  if (b.generator_count() != ng) throw DomainError("trajectory sets have different generator counts");
  if (a.size() == 0 || b.size() == 0) throw DomainError("empty trajectory set");
  const double t0 = std::max(a.times.front(), b.times.front());
  const double t1 = std::min(a.times.back(), b.times.back());
  if (t0 > t1) throw DomainError("trajectory time windows do not overlap");

  auto points_in_window = [&](const TrajectorySet& s) {
    return std::count_if(s.times.begin(), s.times.end(),
                         [&](double t) { return t >= t0 - 1e-12 && t <= t1 + 1e-12; });
  };
  // The finer series supplies the common axis; the other is interpolated.
  const auto na = points_in_window(a);
  const auto nb = points_in_window(b);
  // Ties are broken on the axes themselves so that mae(a, b) == mae(b, a).
  const bool a_finer = na != nb ? na > nb : !(b.times < a.times);
  const TrajectorySet& fine = a_finer ? a : b;
  const TrajectorySet& coarse = a_finer ? b : a;
  const auto fv = series(fine, quantity, reference, inertia);
  const auto cv = series(coarse, quantity, reference, inertia);

  const double scale = quantity == Quantity::delta ? 180.0 / std::numbers::pi : 1.0;
  std::vector<double> out(ng, 0.0);
  std::size_t n = 0;
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const double t = fine.times[k];
    if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
    ++n;
    for (std::size_t g = 0; g < ng; ++g) out[g] += std::abs(fv[g][k] - interpolate(coarse.times, cv[g], t));
  }
  for (double& v : out) v = v * scale / static_cast<double>(n);
  return out;
}

}  // namespace tscopf
