// Internal JSON conversions shared by io.cpp and comparison.cpp.
#pragma once

#include <cmath>

#include <json.hpp>

#include "tscopf/case_model.hpp"
#include "tscopf/opf_steady.hpp"

namespace tscopf::detail {

nlohmann::json dispatch_to_json(const Case& c, const DispatchSolution& d);

/// JSON numbers cannot hold inf or nan; those become null.
inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace tscopf::detail
