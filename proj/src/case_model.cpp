#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"
#include "tscopf/errors.hpp"

namespace tscopf {

using nlohmann::json;

std::size_t Case::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw IndexError("no bus with id " + std::to_string(id));
}

std::size_t Case::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].is_slack) return i;
  }
  throw ValidationError("case has no slack bus");
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field + ": " + what);
}

bool finite_all(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void validate(const Case& c) {
  require(std::isfinite(c.base_mva) && c.base_mva > 0, "base_mva", "must be positive");
  require(std::isfinite(c.omega_syn) && c.omega_syn > 0, "omega_syn", "must be positive");
  require(!c.buses.empty(), "buses", "case has no buses");

  std::set<int> ids;
  int slack_count = 0;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const Bus& b = c.buses[i];
    const std::string f = "buses[" + std::to_string(i) + "]";
    require(ids.insert(b.id).second, f + ".id", "duplicate bus id " + std::to_string(b.id));
    require(!std::isnan(b.v_min) && !std::isnan(b.v_max) && b.v_min <= b.v_max, f + ".v_min", "v_min > v_max");
    require(!std::isnan(b.theta_min) && !std::isnan(b.theta_max) && b.theta_min <= b.theta_max, f + ".theta_min",
            "theta_min > theta_max");
    require(finite_all({b.shunt_g, b.shunt_b}), f + ".shunt_g", "shunt must be finite");
    if (b.is_slack) ++slack_count;
  }
  require(slack_count == 1, "buses.is_slack",
          "exactly one slack bus required, found " + std::to_string(slack_count));

  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const Branch& br = c.branches[i];
    const std::string f = "branches[" + std::to_string(i) + "]";
    require(ids.count(br.from) == 1, f + ".from", "unknown bus " + std::to_string(br.from));
    require(ids.count(br.to) == 1, f + ".to", "unknown bus " + std::to_string(br.to));
    require(br.from != br.to, f + ".to", "branch connects a bus to itself");
    require(finite_all({br.r, br.x, br.b_charging}), f + ".x", "impedance must be finite");
    require(br.r != 0.0 || br.x != 0.0, f + ".x", "zero series impedance");
    require(br.s_max > 0, f + ".s_max", "must be positive");
    require(std::isfinite(br.tap) && br.tap > 0, f + ".tap", "must be positive");
    require(br.theta_diff_min <= br.theta_diff_max, f + ".theta_diff_min", "theta_diff_min > theta_diff_max");
  }

  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const Generator& g = c.generators[i];
    const std::string f = "generators[" + std::to_string(i) + "]";
    require(ids.count(g.bus) == 1, f + ".bus", "unknown bus " + std::to_string(g.bus));
    require(g.p_min <= g.p_max, f + ".p_min", "p_min > p_max");
    require(g.q_min <= g.q_max, f + ".q_min", "q_min > q_max");
    require(finite_all({g.cost, g.cost_quadratic, g.cost_constant}), f + ".cost", "must be finite");
    require(std::isfinite(g.x_d_prime) && g.x_d_prime > 0, f + ".x_d_prime", "must be positive");
    require(std::isfinite(g.h) && g.h > 0, f + ".h", "must be positive");
    require(std::isfinite(g.d) && g.d >= 0, f + ".d", "must be non-negative");
    require(g.e_min <= g.e_max, f + ".e_min", "e_min > e_max");
  }
  require(!c.generators.empty(), "generators", "case has no generators");

  for (std::size_t i = 0; i < c.loads.size(); ++i) {
    const Load& l = c.loads[i];
    const std::string f = "loads[" + std::to_string(i) + "]";
    require(ids.count(l.bus) == 1, f + ".bus", "unknown bus " + std::to_string(l.bus));
    require(finite_all({l.p, l.q}), f + ".p", "must be finite");
  }
}

namespace {

// JSON has no infinity; unrated branches are written as null.
double number_or_inf(const json& j) { return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>(); }

json inf_as_null(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, where);
}

const json& array_field(const json& doc, const char* key, const std::string& origin) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) throw ParseError(origin + ": missing array '" + key + "'");
  return *it;
}

}  // namespace

Case parse_case_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the message.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ParseError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");

  Case c;
  c.base_mva = field<double>(doc, "base_mva", origin);
  c.omega_syn = field_or<double>(doc, "omega_syn", default_omega_syn, origin);

  const auto& buses = array_field(doc, "buses", origin);
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const auto& j = buses[i];
    const std::string w = origin + ": buses[" + std::to_string(i) + "]";
    Bus b;
    b.id = field<int>(j, "id", w);
    b.v_min = field<double>(j, "v_min", w);
    b.v_max = field<double>(j, "v_max", w);
    b.theta_min = field_or<double>(j, "theta_min", b.theta_min, w);
    b.theta_max = field_or<double>(j, "theta_max", b.theta_max, w);
    b.shunt_g = field_or<double>(j, "shunt_g", 0.0, w);
    b.shunt_b = field_or<double>(j, "shunt_b", 0.0, w);
    b.is_slack = field_or<bool>(j, "is_slack", false, w);
    c.buses.push_back(b);
  }

  for (const auto& [i, j] : array_field(doc, "branches", origin).items()) {
    const std::string w = origin + ": branches[" + i + "]";
    Branch br;
    br.from = field<int>(j, "from", w);
    br.to = field<int>(j, "to", w);
    br.r = field<double>(j, "r", w);
    br.x = field<double>(j, "x", w);
    br.b_charging = field_or<double>(j, "b_charging", 0.0, w);
    br.tap = field_or<double>(j, "tap", 1.0, w);
    if (j.contains("s_max")) br.s_max = number_or_inf(j["s_max"]);
    br.theta_diff_min = field_or<double>(j, "theta_diff_min", br.theta_diff_min, w);
    br.theta_diff_max = field_or<double>(j, "theta_diff_max", br.theta_diff_max, w);
    c.branches.push_back(br);
  }

  for (const auto& [i, j] : array_field(doc, "generators", origin).items()) {
    const std::string w = origin + ": generators[" + i + "]";
    Generator g;
    g.bus = field<int>(j, "bus", w);
    g.p_min = field<double>(j, "p_min", w);
    g.p_max = field<double>(j, "p_max", w);
    g.q_min = field<double>(j, "q_min", w);
    g.q_max = field<double>(j, "q_max", w);
    g.cost = field<double>(j, "cost", w);
    g.cost_quadratic = field_or<double>(j, "cost_quadratic", 0.0, w);
    g.cost_constant = field_or<double>(j, "cost_constant", 0.0, w);
    g.x_d_prime = field<double>(j, "x_d_prime", w);
    g.h = field<double>(j, "h", w);
    g.d = field_or<double>(j, "d", 0.0, w);
    g.e_min = field_or<double>(j, "e_min", g.e_min, w);
    g.e_max = field_or<double>(j, "e_max", g.e_max, w);
    c.generators.push_back(g);
  }

  for (const auto& [i, j] : array_field(doc, "loads", origin).items()) {
    const std::string w = origin + ": loads[" + i + "]";
    c.loads.push_back({field<int>(j, "bus", w), field<double>(j, "p", w), field<double>(j, "q", w)});
  }

  validate(c);
  return c;
}

Case parse_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open case file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case_text(ss.str(), path.string());
}

std::string serialize_case(const Case& c) {
  json doc;
  doc["base_mva"] = c.base_mva;
  doc["omega_syn"] = c.omega_syn;
  doc["buses"] = json::array();
  for (const auto& b : c.buses) {
    doc["buses"].push_back({{"id", b.id},
                            {"v_min", b.v_min},
                            {"v_max", b.v_max},
                            {"theta_min", b.theta_min},
                            {"theta_max", b.theta_max},
                            {"shunt_g", b.shunt_g},
                            {"shunt_b", b.shunt_b},
                            {"is_slack", b.is_slack}});
  }
  doc["branches"] = json::array();
  for (const auto& br : c.branches) {
    doc["branches"].push_back({{"from", br.from},
                               {"to", br.to},
                               {"r", br.r},
                               {"x", br.x},
                               {"b_charging", br.b_charging},
                               {"tap", br.tap},
                               {"s_max", inf_as_null(br.s_max)},
                               {"theta_diff_min", br.theta_diff_min},
                               {"theta_diff_max", br.theta_diff_max}});
  }
  doc["generators"] = json::array();
  for (const auto& g : c.generators) {
    doc["generators"].push_back({{"bus", g.bus},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"q_min", g.q_min},
                                 {"q_max", g.q_max},
                                 {"cost", g.cost},
                                 {"cost_quadratic", g.cost_quadratic},
                                 {"cost_constant", g.cost_constant},
                                 {"x_d_prime", g.x_d_prime},
                                 {"h", g.h},
                                 {"d", g.d},
                                 {"e_min", g.e_min},
                                 {"e_max", g.e_max}});
  }
  doc["loads"] = json::array();
  for (const auto& l : c.loads) doc["loads"].push_back({{"bus", l.bus}, {"p", l.p}, {"q", l.q}});
  return doc.dump(2) + "\n";
}

void write_case(const Case& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_case(c);
}

Case scale_loads(const Case& c, double factor) {
  if (!(factor > 0) || !std::isfinite(factor)) {
    throw DomainError("load scale factor must be positive, got " + std::to_string(factor));
  }
  Case out = c;
  for (auto& l : out.loads) {
    l.p *= factor;
    l.q *= factor;
  }
  return out;
}

std::optional<long> aligned_steps(double duration, double dt) {
  if (!(dt > 0)) return std::nullopt;
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio))) return std::nullopt;
  return static_cast<long>(rounded);
}

void validate(const ContingencySpec& c) {
  if (!(c.dt > 0) || !std::isfinite(c.dt)) throw DomainError("dt must be positive");
  if (!(c.horizon > 0)) throw DomainError("horizon must be positive");
  if (c.clearing_time < 0) throw DomainError("clearing_time must be non-negative");
  if (!(c.clearing_time < c.horizon)) throw DomainError("clearing_time must be earlier than the horizon");
  if (!(c.fault_shunt >= 0) || !std::isfinite(c.fault_shunt)) throw DomainError("fault_shunt must be finite and >= 0");
  if (!aligned_steps(c.horizon, c.dt)) {
    throw DomainError("horizon " + std::to_string(c.horizon) + " s is not a multiple of dt " + std::to_string(c.dt));
  }
  if (!aligned_steps(c.clearing_time, c.dt)) {
    throw DomainError("clearing time " + std::to_string(c.clearing_time) + " s is not a multiple of dt " +
                      std::to_string(c.dt));
  }
}

}  // namespace tscopf
