// Reader for the subset of the MATPOWER version-2 case format this library
// consumes. Anything outside that subset is rejected rather than dropped.

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "tscopf/case_model.hpp"
#include "tscopf/errors.hpp"

namespace tscopf {
namespace {

using Table = std::vector<std::vector<double>>;

std::string strip_comments(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    bool in_string = false;
    for (char ch : line) {
      if (ch == '\'') in_string = !in_string;
      if (ch == '%' && !in_string) break;
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

Table parse_matrix(const std::string& body, const std::string& name) {
  Table rows;
  std::string row_text;
  auto flush = [&]() {
    std::istringstream in(row_text);
    std::vector<double> row;
    std::string token;
    while (in >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError("mpc." + name + ": cannot read number '" + token + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
    row_text.clear();
  };
  for (char ch : body) {
    if (ch == ';' || ch == '\n') {
      flush();
    } else {
      row_text.push_back(ch == ',' ? ' ' : ch);
    }
  }
  flush();
  return rows;
}

struct MatpowerData {
  double base_mva = 100.0;
  std::map<std::string, Table> tables;
};

MatpowerData parse_matpower_text(const std::string& raw) {
  const std::string text = strip_comments(raw);
  MatpowerData data;

  static const std::regex assign(R"(mpc\.(\w+)\s*=\s*)");
  auto begin = std::sregex_iterator(text.begin(), text.end(), assign);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[1];
    const auto value_start = static_cast<std::size_t>(it->position() + it->length());
    if (name == "version") continue;
    if (name == "baseMVA") {
      const auto end = text.find(';', value_start);
      try {
        data.base_mva = std::stod(text.substr(value_start, end - value_start));
      } catch (const std::exception&) {
        throw ParseError("mpc.baseMVA: not a number");
      }
      continue;
    }
    if (name != "bus" && name != "gen" && name != "branch" && name != "gencost") {
      throw UnsupportedFeatureError("MATPOWER field mpc." + name + " is not supported");
    }
    const auto open = text.find('[', value_start);
    const auto close = text.find(']', value_start);
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw ParseError("mpc." + name + ": expected a [ ... ] matrix");
    }
    data.tables[name] = parse_matrix(text.substr(open + 1, close - open - 1), name);
  }
  for (const char* required : {"bus", "gen", "branch", "gencost"}) {
    if (!data.tables.count(required)) throw ParseError(std::string("MATPOWER case lacks mpc.") + required);
  }
  return data;
}

void require_columns(const Table& t, std::size_t n, const std::string& name) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].size() < n) {
      throw ParseError("mpc." + name + " row " + std::to_string(i + 1) + " has " + std::to_string(t[i].size()) +
                       " columns, expected at least " + std::to_string(n));
    }
  }
}

constexpr double deg = std::numbers::pi / 180.0;

}  // namespace

Case import_matpower_text(const std::string& matpower_text, const std::string& sidecar_text) {
  const MatpowerData data = parse_matpower_text(matpower_text);
  const Table& bus = data.tables.at("bus");
  const Table& gen = data.tables.at("gen");
  const Table& branch = data.tables.at("branch");
  const Table& gencost = data.tables.at("gencost");
  require_columns(bus, 13, "bus");
  require_columns(gen, 10, "gen");
  require_columns(branch, 11, "branch");
  require_columns(gencost, 4, "gencost");

  Case c;
  c.base_mva = data.base_mva;
  const double base = c.base_mva;

  for (std::size_t i = 0; i < bus.size(); ++i) {
    const auto& r = bus[i];
    const int type = static_cast<int>(r[1]);
    if (type == 4) throw UnsupportedFeatureError("isolated bus (type 4) at row " + std::to_string(i + 1));
    Bus b;
    b.id = static_cast<int>(r[0]);
    b.shunt_g = r[4] / base;
    b.shunt_b = r[5] / base;
    b.v_max = r[11];
    b.v_min = r[12];
    b.is_slack = type == 3;
    c.buses.push_back(b);
    if (r[2] != 0.0 || r[3] != 0.0) c.loads.push_back({b.id, r[2] / base, r[3] / base});
  }

  for (std::size_t i = 0; i < branch.size(); ++i) {
    const auto& r = branch[i];
    if (r[10] == 0.0) throw UnsupportedFeatureError("out-of-service branch at row " + std::to_string(i + 1));
    if (r.size() > 9 && r[9] != 0.0) {
      throw UnsupportedFeatureError("phase-shifting transformer at branch row " + std::to_string(i + 1));
    }
    Branch br;
    br.from = static_cast<int>(r[0]);
    br.to = static_cast<int>(r[1]);
    br.r = r[2];
    br.x = r[3];
    br.b_charging = r[4];
    br.s_max = r[5] == 0.0 ? std::numeric_limits<double>::infinity() : r[5] / base;
    br.tap = r[8] == 0.0 ? 1.0 : r[8];
    if (r.size() >= 13) {
      br.theta_diff_min = r[11] * deg;
      br.theta_diff_max = r[12] * deg;
    }
    c.branches.push_back(br);
  }

  if (gencost.size() != gen.size()) {
    throw UnsupportedFeatureError("gencost must have exactly one row per generator (reactive costs unsupported)");
  }
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const auto& r = gen[i];
    if (r[7] <= 0.0) throw UnsupportedFeatureError("out-of-service generator at row " + std::to_string(i + 1));
    Generator g;
    g.bus = static_cast<int>(r[0]);
    g.q_max = r[3] / base;
    g.q_min = r[4] / base;
    g.p_max = r[8] / base;
    g.p_min = r[9] / base;

    const auto& cost = gencost[i];
    const int model = static_cast<int>(cost[0]);
    if (model != 2) {
      throw UnsupportedFeatureError("gencost row " + std::to_string(i + 1) + ": only polynomial costs (model 2)");
    }
    const auto n = static_cast<std::size_t>(cost[3]);
    if (cost.size() < 4 + n) throw ParseError("gencost row " + std::to_string(i + 1) + " is truncated");
    if (n > 3) {
      for (std::size_t k = 0; k + 3 < n; ++k) {
        if (cost[4 + k] != 0.0) {
          throw UnsupportedFeatureError("gencost row " + std::to_string(i + 1) + ": polynomial degree above 2");
        }
      }
    }
    // Coefficients are highest order first, in MW; convert to p.u. power.
    std::vector<double> coeff(3, 0.0);  // c0, c1, c2
    for (std::size_t k = 0; k < std::min<std::size_t>(n, 3); ++k) coeff[k] = cost[4 + n - 1 - k];
    g.cost_constant = coeff[0];
    g.cost = coeff[1] * base;
    g.cost_quadratic = coeff[2] * base * base;
    c.generators.push_back(g);
  }

  nlohmann::json side;
  try {
    side = nlohmann::json::parse(sidecar_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("dynamics sidecar: ") + e.what());
  }
  if (!side.is_array()) throw ParseError("dynamics sidecar: expected an array");
  std::vector<bool> seen(c.generators.size(), false);
  for (const auto& entry : side) {
    try {
      const auto k = entry.at("gen_index").get<long>();
      if (k < 1 || static_cast<std::size_t>(k) > c.generators.size()) {
        throw ValidationError("dynamics sidecar: gen_index " + std::to_string(k) + " out of range");
      }
      auto& g = c.generators[static_cast<std::size_t>(k - 1)];
      g.x_d_prime = entry.at("x_d_prime").get<double>();
      g.h = entry.at("h").get<double>();
      g.d = entry.value("d", 0.0);
      if (entry.contains("e_min")) g.e_min = entry["e_min"].get<double>();
      if (entry.contains("e_max")) g.e_max = entry["e_max"].get<double>();
      seen[static_cast<std::size_t>(k - 1)] = true;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("dynamics sidecar: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw ValidationError("dynamics sidecar has no entry for generator " + std::to_string(i + 1));
  }

  validate(c);
  return c;
}

Case import_matpower(const std::filesystem::path& path, const std::filesystem::path& sidecar) {
  auto slurp = [](const std::filesystem::path& p, const char* what) {
    std::ifstream in(p);
    if (!in) throw IoError(std::string("cannot open ") + what + " " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string text = slurp(path, "MATPOWER case");
  return import_matpower_text(text, slurp(sidecar, "dynamics sidecar"));
}

}  // namespace tscopf
