#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "tscopf/nlp.hpp"

namespace tscopf::nlp {

void Evaluation::add_jacobian(std::size_t row, std::size_t var, double value) {
  switch (jacobian_mode_) {
    case Mode::off:
      return;
    case Mode::record:
      jac_pattern_->emplace_back(row, var);
      return;
    case Mode::write:
      if (jac_cursor_ >= jac_pattern_->size() || (*jac_pattern_)[jac_cursor_] != Coordinate{row, var}) {
        throw std::logic_error("block '" + *block_name_ +
                               "' emitted a Jacobian entry outside its recorded sparsity pattern");
      }
      jac_values_[jac_cursor_++] = value;
      return;
  }
}

void Evaluation::add_hessian(std::size_t row, std::size_t var_a, std::size_t var_b, double value) {
  if (var_a < var_b) std::swap(var_a, var_b);
  switch (hessian_mode_) {
    case Mode::off:
      return;
    case Mode::record:
      hess_pattern_->emplace_back(var_a, var_b);
      return;
    case Mode::write:
      if (hess_cursor_ >= hess_pattern_->size() ||
          (*hess_pattern_)[hess_cursor_] != Coordinate{var_a, var_b}) {
        throw std::logic_error("block '" + *block_name_ +
                               "' emitted a Hessian entry outside its recorded sparsity pattern");
      }
      hess_values_[hess_cursor_++] = weights_[row] * value;
      return;
  }
}

std::string ConstraintBlock::row_label(std::size_t row) const {
  return name_ + "[" + std::to_string(row) + "]";
}

std::size_t NlpProblem::add_variable(std::string name, double lower, double upper, double start) {
  variables_.push_back({std::move(name), lower, upper, start});
  return variables_.size() - 1;
}

std::size_t NlpProblem::add_block(std::unique_ptr<ConstraintBlock> block) {
  blocks_.push_back(std::move(block));
  return blocks_.size() - 1;
}

void NlpProblem::set_objective(std::unique_ptr<ConstraintBlock> objective) {
  if (objective->rows() != 1) throw std::invalid_argument("objective block must have exactly one row");
  objective_ = std::move(objective);
}

void NlpProblem::set_bounds(std::size_t var, double lower, double upper) {
  auto& v = variables_.at(var);
  v.lower = lower;
  v.upper = upper;
}

std::vector<double> NlpProblem::start_point() const {
  std::vector<double> x(variables_.size());
  std::transform(variables_.begin(), variables_.end(), x.begin(), [](const Variable& v) { return v.start; });
  return x;
}

std::size_t NlpProblem::constraint_count() const {
  std::size_t m = 0;
  for (const auto& b : blocks_) m += b->rows();
  return m;
}

void NlpProblem::validate() const {
  if (!objective_) throw std::invalid_argument("NLP has no objective");
  std::unordered_set<std::string> names;
  for (const auto& v : variables_) {
    if (!names.insert(v.name).second) throw std::invalid_argument("duplicate variable name '" + v.name + "'");
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw std::invalid_argument("variable '" + v.name + "' has inverted or NaN bounds");
    }
  }
  std::unordered_set<std::string> block_names;
  for (const auto& b : blocks_) {
    if (!block_names.insert(b->name()).second) {
      throw std::invalid_argument("duplicate constraint block name '" + b->name() + "'");
    }
  }
}

ProblemEvaluator::ProblemEvaluator(const NlpProblem& problem) : problem_(&problem) {
  problem.validate();
  const auto x0 = problem.start_point();
  const std::size_t nb = problem.blocks().size();
  block_patterns_.resize(nb);
  block_row_offset_.resize(nb);
  block_jac_offset_.resize(nb);

  auto record = [&](const ConstraintBlock& block, BlockPattern& pattern) {
    std::vector<double> residual(block.rows(), 0.0);
    Evaluation e;
    e.residual_ = residual;
    e.jacobian_mode_ = Evaluation::Mode::record;
    e.hessian_mode_ = Evaluation::Mode::record;
    e.jac_pattern_ = &pattern.jac;
    e.hess_pattern_ = &pattern.hess;
    e.block_name_ = &block.name();
    block.evaluate(x0, e);
    for (const auto& [row, var] : pattern.jac) {
      if (row >= block.rows() || var >= problem.variable_count()) {
        throw std::logic_error("block '" + block.name() + "' references an out-of-range row or variable");
      }
    }
    for (const auto& [a, b] : pattern.hess) {
      if (a >= problem.variable_count()) {
        throw std::logic_error("block '" + block.name() + "' references an out-of-range Hessian variable");
      }
    }
  };

  record(problem.objective(), objective_pattern_);
  std::size_t row = 0;
  std::size_t jac = 0;
  block_hess_offset_.resize(nb);
  std::size_t hess = objective_pattern_.hess.size();
  hess_pattern_ = objective_pattern_.hess;
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& block = *problem.blocks()[b];
    record(block, block_patterns_[b]);
    block_row_offset_[b] = row;
    block_jac_offset_[b] = jac;
    block_hess_offset_[b] = hess;
    for (std::size_t r = 0; r < block.rows(); ++r) {
      row_kind_.push_back(block.kind());
      row_block_.push_back(b);
    }
    for (const auto& [lr, var] : block_patterns_[b].jac) jac_pattern_.emplace_back(row + lr, var);
    hess_pattern_.insert(hess_pattern_.end(), block_patterns_[b].hess.begin(), block_patterns_[b].hess.end());
    row += block.rows();
    jac += block_patterns_[b].jac.size();
    hess += block_patterns_[b].hess.size();
  }
}

void ProblemEvaluator::evaluate_block(const ConstraintBlock& block, const BlockPattern& pattern,
                                      std::span<const double> x, std::span<double> residual,
                                      double* jac_values, double* hess_values,
                                      std::span<const double> weights) const {
  Evaluation e;
  std::fill(residual.begin(), residual.end(), 0.0);
  e.residual_ = residual;
  e.block_name_ = &block.name();
  // Write mode only reads the pattern.
  if (jac_values != nullptr) {
    e.jacobian_mode_ = Evaluation::Mode::write;
    e.jac_pattern_ = const_cast<std::vector<Coordinate>*>(&pattern.jac);
    e.jac_values_ = std::span<double>(jac_values, pattern.jac.size());
  }
  if (hess_values != nullptr) {
    e.hessian_mode_ = Evaluation::Mode::write;
    e.hess_pattern_ = const_cast<std::vector<Coordinate>*>(&pattern.hess);
    e.hess_values_ = std::span<double>(hess_values, pattern.hess.size());
    e.weights_ = weights;
  }
  block.evaluate(x, e);
  if (e.jacobian_mode_ == Evaluation::Mode::write && e.jac_cursor_ != pattern.jac.size()) {
    throw std::logic_error("block '" + block.name() + "' emitted fewer Jacobian entries than recorded");
  }
  if (e.hessian_mode_ == Evaluation::Mode::write && e.hess_cursor_ != pattern.hess.size()) {
    throw std::logic_error("block '" + block.name() + "' emitted fewer Hessian entries than recorded");
  }
}

double ProblemEvaluator::objective(std::span<const double> x) const {
  double value = 0.0;
  evaluate_block(problem_->objective(), objective_pattern_, x, std::span<double>(&value, 1), nullptr, nullptr, {});
  return value;
}

void ProblemEvaluator::gradient(std::span<const double> x, std::span<double> grad) const {
  double value = 0.0;
  std::vector<double> vals(objective_pattern_.jac.size());
  evaluate_block(problem_->objective(), objective_pattern_, x, std::span<double>(&value, 1), vals.data(),
                 nullptr, {});
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t k = 0; k < vals.size(); ++k) grad[objective_pattern_.jac[k].second] += vals[k];
}

void ProblemEvaluator::constraints(std::span<const double> x, std::span<double> c) const {
  for (std::size_t b = 0; b < block_patterns_.size(); ++b) {
    const auto& block = *problem_->blocks()[b];
    evaluate_block(block, block_patterns_[b], x, c.subspan(block_row_offset_[b], block.rows()), nullptr,
                   nullptr, {});
  }
}

void ProblemEvaluator::jacobian_values(std::span<const double> x, std::span<double> values) const {
  std::vector<double> residual;
  for (std::size_t b = 0; b < block_patterns_.size(); ++b) {
    const auto& block = *problem_->blocks()[b];
    residual.assign(block.rows(), 0.0);
    if (block_patterns_[b].jac.empty()) continue;
    evaluate_block(block, block_patterns_[b], x, residual, values.data() + block_jac_offset_[b], nullptr, {});
  }
}

void ProblemEvaluator::hessian_values(std::span<const double> x, double objective_factor,
                                      std::span<const double> multipliers, std::span<double> values) const {
  std::vector<double> residual(1);
  double weight = objective_factor;
  const std::size_t obj_count = objective_pattern_.hess.size();
  if (obj_count > 0) {
    evaluate_block(problem_->objective(), objective_pattern_, x, residual, nullptr, values.data(),
                   std::span<const double>(&weight, 1));
  }
  for (std::size_t b = 0; b < block_patterns_.size(); ++b) {
    const auto& block = *problem_->blocks()[b];
    const std::size_t count = block_patterns_[b].hess.size();
    if (count == 0) continue;
    residual.assign(block.rows(), 0.0);
    evaluate_block(block, block_patterns_[b], x, residual, nullptr, values.data() + block_hess_offset_[b],
                   multipliers.subspan(block_row_offset_[b], block.rows()));
  }
}

std::string ProblemEvaluator::row_label(std::size_t row) const {
  const std::size_t b = row_block_[row];
  return problem_->blocks()[b]->row_label(row - block_row_offset_[b]);
}

std::pair<std::string, double> worst_violation(const ProblemEvaluator& evaluator,
                                               std::span<const double> constraint_values) {
  std::string block;
  double worst = 0.0;
  for (std::size_t i = 0; i < evaluator.m(); ++i) {
    const double v = evaluator.row_kind(i) == ConstraintKind::equality ? std::abs(constraint_values[i])
                                                                       : std::max(0.0, constraint_values[i]);
    if (v > worst || std::isnan(v)) {
      worst = v;
      block = evaluator.problem().blocks()[evaluator.row_block(i)]->name();
      if (std::isnan(v)) break;
    }
  }
  return {block, worst};
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::acceptable: return "acceptable";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

}  // namespace tscopf::nlp
