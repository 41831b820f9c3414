#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace tscopf {

// All electrical quantities are per unit on Case::base_mva; angles in radians.

struct Bus {
  int id = 0;
  double v_min = 0.9;
  double v_max = 1.1;
  double theta_min = -std::numbers::pi;
  double theta_max = std::numbers::pi;
  double shunt_g = 0.0;
  double shunt_b = 0.0;
  bool is_slack = false;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;
  double tap = 1.0;
  /// Apparent-power rating; +inf means unrated.
  double s_max = std::numeric_limits<double>::infinity();
  double theta_diff_min = -2.0 * std::numbers::pi;
  double theta_diff_max = 2.0 * std::numbers::pi;
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  /// Cost polynomial in p.u. active power: cost_quadratic*P^2 + cost*P + cost_constant.
  double cost = 0.0;
  double cost_quadratic = 0.0;
  double cost_constant = 0.0;
  double x_d_prime = 0.0;
  double h = 0.0;
  double d = 0.0;
  double e_min = 0.5;
  double e_max = 2.0;
};

struct Load {
  int bus = 0;
  double p = 0.0;
  double q = 0.0;
};

inline constexpr double default_omega_syn = 2.0 * std::numbers::pi * 60.0;

/// Static network, generator dynamics and cost data of one study.
/// Immutable once validated; share freely between concurrent solves.
struct Case {
  double base_mva = 100.0;
  double omega_syn = default_omega_syn;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  /// Position of the bus with the given id. Throws IndexError when absent.
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const;
  std::size_t bus_count() const { return buses.size(); }
  std::size_t generator_count() const { return generators.size(); }
};

/// Checks every invariant of the data model; throws ValidationError naming
/// the offending field.
void validate(const Case& c);

Case parse_case(const std::filesystem::path& path);
/// Parses a case from JSON text; `origin` prefixes error messages.
Case parse_case_text(const std::string& text, const std::string& origin = "<case>");
std::string serialize_case(const Case& c);
void write_case(const Case& c, const std::filesystem::path& path);

/// Reads a MATPOWER case (bus, gen, branch, gencost tables) plus a JSON
/// sidecar with generator dynamics `[{gen_index, x_d_prime, h, d}]`.
Case import_matpower(const std::filesystem::path& path, const std::filesystem::path& sidecar);
Case import_matpower_text(const std::string& matpower_text, const std::string& sidecar_text);

/// Multiplies every load's p and q by factor (> 0).
Case scale_loads(const Case& c, double factor);

}  // namespace tscopf
