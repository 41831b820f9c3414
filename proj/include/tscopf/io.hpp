#pragma once

#include <filesystem>
#include <string>

#include "tscopf/admittance.hpp"
#include "tscopf/case_model.hpp"
#include "tscopf/contingency.hpp"
#include "tscopf/nlp.hpp"
#include "tscopf/opf_steady.hpp"
#include "tscopf/tdsim.hpp"

namespace tscopf {

/// CSV with header `t,delta_g1,...,delta_gN,omega_g1,...,omega_gN`; values
/// are printed with 17 significant digits so that reading back is exact.
std::string trajectories_csv(const TrajectorySet& traj);
TrajectorySet parse_trajectories_csv(const std::string& text, const std::string& origin = "<csv>");

std::string dispatch_json(const Case& c, const DispatchSolution& dispatch);
DispatchSolution parse_dispatch_json(const std::string& text, const std::string& origin = "<dispatch>");

std::string reduced_network_json(const Case& c, const ReducedNetwork& network);

/// Contingency JSON: {id, fault_bus, cleared_branch: [from, to] | null,
/// clearing_time, dt, horizon, fault_shunt}; missing optional fields take
/// their defaults.
ContingencySpec parse_contingency_json(const std::string& text, const std::string& origin = "<contingency>");
std::string contingency_json(const ContingencySpec& spec);

/// Variables (name, bounds, start), constraint rows (label, kind) and the
/// sparsity counts of one assembled problem.
std::string nlp_dump_json(const nlp::NlpProblem& problem);

/// Sizes of the problem and the outcome of its solve.
std::string nlp_statistics_json(const nlp::NlpProblem& problem, const nlp::SolveReport& report);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for batch use: the file is written whole or an
/// IoError is raised.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tscopf
