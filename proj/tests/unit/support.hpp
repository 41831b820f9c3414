#pragma once

#include <string>

#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"

namespace test {

inline std::string data(const std::string& name) { return std::string(TSCOPF_DATA_DIR) + "/" + name; }

inline tscopf::Case bundled(double load_scale = 1.5) {
  return tscopf::scale_loads(tscopf::parse_case(data("wecc9.json")), load_scale);
}

inline tscopf::ContingencySpec fault_at_4() {
  tscopf::ContingencySpec k;
  k.id = "contingency1";
  k.fault_bus = 4;
  k.cleared_branch = {4, 5};
  k.clearing_time = 0.15;
  return k;
}

inline tscopf::ContingencySpec fault_at_7() {
  tscopf::ContingencySpec k;
  k.id = "contingency2";
  k.fault_bus = 7;
  k.cleared_branch = {7, 5};
  k.clearing_time = 0.3;
  return k;
}

}  // namespace test
