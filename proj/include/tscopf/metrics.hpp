#pragma once

#include <vector>

#include "tscopf/tdsim.hpp"

namespace tscopf {

enum class Quantity { delta, omega };

/// Angles compared as absolute rotor angles or relative to the centre of
/// inertia. Speed deviations are always compared as they are.
enum class AngleReference { absolute, coi };

const char* to_string(Quantity q);
const char* to_string(AngleReference r);

/// Mean absolute error per generator over the common time window, after
/// linear interpolation of the coarser series onto the finer axis. Angles
/// are reported in degrees, speed deviations in p.u. `inertia` is required
/// for AngleReference::coi. Throws DomainError for disjoint windows or
/// mismatched generator sets.
std::vector<double> mae(const TrajectorySet& a, const TrajectorySet& b, Quantity quantity,
                        AngleReference reference = AngleReference::absolute,
                        const std::vector<double>& inertia = {});

}  // namespace tscopf
