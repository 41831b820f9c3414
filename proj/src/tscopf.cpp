#include <cmath>

#include "tscopf/errors.hpp"

#include "tscopf/tscopf.hpp"

namespace tscopf {

namespace {

// Initial barrier parameter when starting from solved trajectories; a large
// value would push the iterates away from the good start.
constexpr double warm_mu_init = 1e-4;

void trajectory_start(nlp::NlpProblem& problem, const Case& c, const TscopfModel& model, const std::vector<double>& e,
                      const std::vector<double>& pmec, const TrajectorySet& source) {
  const auto& idx = model.dynamic;
  const auto& grid = model.grid;
  std::vector<double> times(static_cast<std::size_t>(grid.steps + 1));
  for (long t = 0; t <= grid.steps; ++t) times[static_cast<std::size_t>(t)] = grid.time(t);
  const TrajectorySet traj = resample(source, times);
  const std::size_t ng = c.generator_count();
  if (traj.generator_count() != ng) throw DomainError("start trajectories do not match the generator count");

  double h_sum = 0.0;
  for (const auto& g : c.generators) h_sum += g.h;
  std::vector<double> delta(ng);
  for (long t = 0; t <= grid.steps; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    double coi = 0.0;
    for (std::size_t g = 0; g < ng; ++g) {
      delta[g] = traj.delta[g][ti];
      coi += c.generators[g].h * delta[g];
      problem.set_start(idx.delta[g][ti], delta[g]);
      problem.set_start(idx.domega[g][ti], traj.omega[g][ti]);
    }
    problem.set_start(idx.coi[ti], coi / h_sum);
    const auto& net = grid.stage_of(t) == NetworkStage::during_fault ? model.networks.during : model.networks.post;
    const auto pe = electrical_power(net, e, delta);
    for (std::size_t g = 0; g < ng; ++g) problem.set_start(idx.pele[g][ti], pe[g]);
  }
  for (std::size_t g = 0; g < ng; ++g) problem.set_start(idx.pmec[g], pmec[g]);
}

}  // namespace

TscopfModel build_tscopf_model(const Case& c, const ContingencySpec& contingency,
                               const LoadVoltageAssumption& assumption, const DispatchSolution& start,
                               double delta_limit, const TrajectorySet* trajectories) {
  validate(c);
  TscopfModel model;
  model.grid = make_grid(contingency);
  model.networks = build_stage_networks(c, contingency, assumption);
  model.problem = std::make_unique<nlp::NlpProblem>();
  auto& p = *model.problem;

  model.steady = add_steady_variables(p, c, true);
  model.dynamic = add_dynamic_variables(p, c, model.grid);

  DispatchSolution init = start;
  if (init.e.size() != c.generator_count()) {
    generator_internal_state(c, init.v, init.theta, init.p, init.q, init.e, init.delta0);
  }
  warm_start(p, model.steady, init);
  if (trajectories != nullptr) {
    trajectory_start(p, c, model, init.e, init.p, *trajectories);
  } else {
    flat_dynamic_start(p, c, model.dynamic, model.grid, init.delta0, init.p);
  }

  p.set_objective(build_objective(c, model.steady));
  for (auto& b : build_power_balance(c, model.steady)) p.add_block(std::move(b));
  for (auto& b : build_operating_limits(c, model.steady)) p.add_block(std::move(b));
  p.add_block(build_generator_init(c, model.steady));
  p.add_block(link_initial_conditions(model.steady, model.dynamic));
  for (auto& b : build_trapezoidal_swing(c, model.grid, model.dynamic)) p.add_block(std::move(b));
  p.add_block(build_electrical_power(c, model.networks, model.grid, model.dynamic, model.steady.e));
  for (auto& b : build_coi_constraints(c, model.grid, model.dynamic, delta_limit)) p.add_block(std::move(b));
  return model;
}

TrajectorySet extract_trajectories(const TscopfModel& model, std::span<const double> x,
                                   const std::string& contingency_id) {
  TrajectorySet out;
  out.dt = model.grid.dt;
  out.contingency_id = contingency_id;
  out.source = TrajectorySource::optimizer;
  const std::size_t ng = model.dynamic.delta.size();
  const std::size_t nt = model.dynamic.coi.size();
  out.times.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) out.times[t] = model.grid.time(static_cast<long>(t));
  out.delta.assign(ng, std::vector<double>(nt));
  out.omega.assign(ng, std::vector<double>(nt));
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t t = 0; t < nt; ++t) {
      out.delta[g][t] = x[model.dynamic.delta[g][t]];
      out.omega[g][t] = x[model.dynamic.domega[g][t]];
    }
  }
  return out;
}

TscopfResult solve_tscopf(const Case& c, const ContingencySpec& contingency, const LoadVoltageAssumption& assumption,
                          const DispatchSolution& start, const TscopfOptions& options) {
  DispatchSolution init = start;
  std::optional<TrajectorySet> trajectories = options.initial_trajectories;
  const double coarse = options.coarse_start_dt;
  if (!trajectories && coarse > 0.0 && contingency.dt < coarse * (1.0 - 1e-9)) {
    ContingencySpec coarse_spec = contingency;
    coarse_spec.dt = coarse;
    bool aligned = true;
    try {
      validate(coarse_spec);
    } catch (const Error&) {
      aligned = false;
    }
    if (aligned) {
      TscopfOptions coarse_options = options;
      coarse_options.coarse_start_dt = 0.0;
      coarse_options.solver.log = nullptr;
      const TscopfResult pre = solve_tscopf(c, coarse_spec, assumption, start, coarse_options);
      if (pre.report.status == nlp::SolveStatus::optimal || pre.report.status == nlp::SolveStatus::acceptable) {
        init = pre.dispatch;
        trajectories = pre.trajectories;
      }
    }
  }
  const TscopfModel model = build_tscopf_model(c, contingency, assumption, init, options.delta_limit,
                                               trajectories ? &*trajectories : nullptr);
  nlp::SolverOptions solver = options.solver;
  if (trajectories && solver.mu_init > warm_mu_init) solver.mu_init = warm_mu_init;
  TscopfResult result;
  result.variables = model.problem->variable_count();
  result.constraints = model.problem->constraint_count();
  result.report = nlp::solve(*model.problem, solver);
  result.dispatch = extract_dispatch(c, model.steady, result.report.x);
  result.trajectories = extract_trajectories(model, result.report.x, contingency.id);

  std::vector<double> inertia;
  for (const auto& g : c.generators) inertia.push_back(g.h);
  const auto rel = result.trajectories.coi_relative_delta(inertia);
  for (const auto& series : rel) {
    double m = 0.0;
    for (double v : series) m = std::max(m, std::abs(v));
    result.max_coi_deviation.push_back(m);
  }
  return result;
}

}  // namespace tscopf
