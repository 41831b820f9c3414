#include "tscopf/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "json_support.hpp"
#include "tscopf/errors.hpp"

namespace tscopf {

using json = nlohmann::json;

namespace {

json parse_document(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ParseError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& origin) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(origin + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(origin + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& origin) {
  return obj.contains(key) ? get<T>(obj, key, origin) : fallback;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto end = line.find(sep, begin);
    out.push_back(line.substr(begin, end == std::string::npos ? std::string::npos : end - begin));
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  return out;
}

json bound(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

}  // namespace

namespace detail {

json dispatch_to_json(const Case& c, const DispatchSolution& d) {
  json doc;
  std::vector<int> bus_ids;
  for (const auto& b : c.buses) bus_ids.push_back(b.id);
  std::vector<int> gen_buses;
  for (const auto& g : c.generators) gen_buses.push_back(g.bus);
  doc["objective"] = finite_or_null(d.objective);
  doc["bus_ids"] = bus_ids;
  doc["v"] = d.v;
  doc["theta"] = d.theta;
  doc["generator_buses"] = gen_buses;
  doc["p"] = d.p;
  doc["q"] = d.q;
  doc["e"] = d.e;
  doc["delta0"] = d.delta0;
  return doc;
}

}  // namespace detail

std::string trajectories_csv(const TrajectorySet& traj) {
  const std::size_t ng = traj.generator_count();
  std::string out = "t";
  for (std::size_t g = 0; g < ng; ++g) out += ",delta_g" + std::to_string(g + 1);
  for (std::size_t g = 0; g < ng; ++g) out += ",omega_g" + std::to_string(g + 1);
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_double(traj.times[k]);
    for (std::size_t g = 0; g < ng; ++g) out += ',' + format_double(traj.delta[g][k]);
    for (std::size_t g = 0; g < ng; ++g) out += ',' + format_double(traj.omega[g][k]);
    out += '\n';
  }
  return out;
}

TrajectorySet parse_trajectories_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(origin + ": empty file");
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "t" || header.size() % 2 != 1)
    throw ParseError(origin + ":1: expected header t,delta_g1..,omega_g1..");
  const std::size_t ng = (header.size() - 1) / 2;
  for (std::size_t g = 0; g < ng; ++g) {
    if (header[1 + g] != "delta_g" + std::to_string(g + 1) || header[1 + ng + g] != "omega_g" + std::to_string(g + 1))
      throw ParseError(origin + ":1: unexpected column names");
  }

  TrajectorySet traj;
  traj.delta.assign(ng, {});
  traj.omega.assign(ng, {});
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns");
    std::vector<double> row;
    for (const auto& cell : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0' || errno == ERANGE)
        throw ParseError(origin + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!traj.times.empty() && row[0] <= traj.times.back())
      throw ParseError(origin + ":" + std::to_string(line_no) + ": times must increase");
    traj.times.push_back(row[0]);
    for (std::size_t g = 0; g < ng; ++g) {
      traj.delta[g].push_back(row[1 + g]);
      traj.omega[g].push_back(row[1 + ng + g]);
    }
  }
  if (traj.times.size() >= 2) traj.dt = traj.times[1] - traj.times[0];
  return traj;
}

std::string dispatch_json(const Case& c, const DispatchSolution& dispatch) {
  return detail::dispatch_to_json(c, dispatch).dump(2) + "\n";
}

DispatchSolution parse_dispatch_json(const std::string& text, const std::string& origin) {
  const json doc = parse_document(text, origin);
  if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
  DispatchSolution d;
  d.v = get<std::vector<double>>(doc, "v", origin);
  d.theta = get<std::vector<double>>(doc, "theta", origin);
  d.p = get<std::vector<double>>(doc, "p", origin);
  d.q = get<std::vector<double>>(doc, "q", origin);
  d.e = get_or<std::vector<double>>(doc, "e", {}, origin);
  d.delta0 = get_or<std::vector<double>>(doc, "delta0", {}, origin);
  if (doc.contains("objective") && !doc["objective"].is_null()) d.objective = get<double>(doc, "objective", origin);
  if (d.v.size() != d.theta.size()) throw ParseError(origin + ": v and theta differ in length");
  if (d.p.size() != d.q.size()) throw ParseError(origin + ": p and q differ in length");
  return d;
}

std::string reduced_network_json(const Case& c, const ReducedNetwork& network) {
  json doc;
  doc["stage"] = to_string(network.stage);
  std::vector<int> gen_buses;
  for (const auto& g : c.generators) gen_buses.push_back(g.bus);
  doc["generator_buses"] = gen_buses;
  // Row-major [re, im] pairs.
  json y = json::array();
  for (Eigen::Index i = 0; i < network.y_red.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < network.y_red.cols(); ++j)
      row.push_back({network.y_red(i, j).real(), network.y_red(i, j).imag()});
    y.push_back(row);
  }
  doc["y_red"] = y;
  return doc.dump(2) + "\n";
}

ContingencySpec parse_contingency_json(const std::string& text, const std::string& origin) {
  const json doc = parse_document(text, origin);
  if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
  ContingencySpec s;
  s.id = get_or<std::string>(doc, "id", s.id, origin);
  s.fault_bus = get<int>(doc, "fault_bus", origin);
  if (doc.contains("cleared_branch") && !doc["cleared_branch"].is_null()) {
    const auto pair = get<std::vector<int>>(doc, "cleared_branch", origin);
    if (pair.size() != 2) throw ParseError(origin + ".cleared_branch: expected [from, to]");
    s.cleared_branch = std::make_pair(pair[0], pair[1]);
  }
  s.clearing_time = get_or<double>(doc, "clearing_time", s.clearing_time, origin);
  s.dt = get_or<double>(doc, "dt", s.dt, origin);
  s.horizon = get_or<double>(doc, "horizon", s.horizon, origin);
  s.fault_shunt = get_or<double>(doc, "fault_shunt", s.fault_shunt, origin);
  return s;
}

std::string contingency_json(const ContingencySpec& spec) {
  json doc;
  doc["id"] = spec.id;
  doc["fault_bus"] = spec.fault_bus;
  doc["cleared_branch"] =
      spec.cleared_branch ? json::array({spec.cleared_branch->first, spec.cleared_branch->second}) : json(nullptr);
  doc["clearing_time"] = spec.clearing_time;
  doc["dt"] = spec.dt;
  doc["horizon"] = spec.horizon;
  doc["fault_shunt"] = spec.fault_shunt;
  return doc.dump(2) + "\n";
}

std::string nlp_dump_json(const nlp::NlpProblem& problem) {
  const nlp::ProblemEvaluator ev(problem);
  json vars = json::array();
  for (const auto& v : problem.variables())
    vars.push_back({{"name", v.name}, {"lower", bound(v.lower)}, {"upper", bound(v.upper)}, {"start", v.start}});
  json rows = json::array();
  for (std::size_t r = 0; r < ev.m(); ++r) {
    rows.push_back({{"block", problem.blocks()[ev.row_block(r)]->name()},
                    {"label", ev.row_label(r)},
                    {"kind", ev.row_kind(r) == nlp::ConstraintKind::equality ? "equality" : "inequality"}});
  }
  json doc;
  doc["variables"] = vars;
  doc["constraints"] = rows;
  doc["jacobian_nonzeros"] = ev.jacobian_pattern().size();
  doc["hessian_nonzeros"] = ev.hessian_pattern().size();
  return doc.dump(1) + "\n";
}

std::string nlp_statistics_json(const nlp::NlpProblem& problem, const nlp::SolveReport& report) {
  const nlp::ProblemEvaluator ev(problem);
  std::size_t equalities = 0;
  for (std::size_t r = 0; r < ev.m(); ++r) equalities += ev.row_kind(r) == nlp::ConstraintKind::equality;
  json blocks = json::array();
  for (const auto& b : problem.blocks())
    blocks.push_back({{"name", b->name()},
                      {"rows", b->rows()},
                      {"kind", b->kind() == nlp::ConstraintKind::equality ? "equality" : "inequality"}});
  // Wall time is left out so that repeated runs give identical files.
  json doc;
  doc["variables"] = ev.n();
  doc["constraints"] = ev.m();
  doc["equalities"] = equalities;
  doc["inequalities"] = ev.m() - equalities;
  doc["jacobian_nonzeros"] = ev.jacobian_pattern().size();
  doc["hessian_nonzeros"] = ev.hessian_pattern().size();
  doc["blocks"] = blocks;
  doc["status"] = nlp::to_string(report.status);
  doc["iterations"] = report.iterations;
  doc["objective"] = detail::finite_or_null(report.objective_value);
  doc["kkt_stationarity"] = detail::finite_or_null(report.kkt_stationarity);
  doc["kkt_feasibility"] = detail::finite_or_null(report.kkt_feasibility);
  doc["kkt_complementarity"] = detail::finite_or_null(report.kkt_complementarity);
  doc["worst_block"] = report.worst_block;
  doc["worst_violation"] = detail::finite_or_null(report.worst_violation);
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("error writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot write " + path.string());
  }
}

}  // namespace tscopf
