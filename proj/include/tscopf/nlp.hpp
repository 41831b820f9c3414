#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tscopf::nlp {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class ConstraintKind { equality, inequality };

/// Sink that constraint blocks write into. A block emits residual,
/// first-derivative and second-derivative terms through the add_* calls; the
/// sequence of (row, variable) coordinates it emits must not depend on x.
/// The first evaluation records that sequence as the block's sparsity
/// pattern and every later evaluation is checked against it.
///
/// Second derivatives are emitted once per unordered variable pair; the
/// evaluator weights them by the row multiplier and folds them into the
/// lower triangle of the Lagrangian Hessian.
class Evaluation {
 public:
  void add_residual(std::size_t row, double value) { residual_[row] += value; }
  void add_jacobian(std::size_t row, std::size_t var, double value);
  void add_hessian(std::size_t row, std::size_t var_a, std::size_t var_b, double value);

  bool wants_jacobian() const { return jacobian_mode_ != Mode::off; }
  bool wants_hessian() const { return hessian_mode_ != Mode::off; }

 private:
  friend class ProblemEvaluator;
  enum class Mode { off, record, write };

  std::span<double> residual_;
  Mode jacobian_mode_ = Mode::off;
  Mode hessian_mode_ = Mode::off;
  std::vector<std::pair<std::size_t, std::size_t>>* jac_pattern_ = nullptr;
  std::vector<std::pair<std::size_t, std::size_t>>* hess_pattern_ = nullptr;
  std::span<double> jac_values_;
  std::span<double> hess_values_;
  std::span<const double> weights_;
  std::size_t jac_cursor_ = 0;
  std::size_t hess_cursor_ = 0;
  const std::string* block_name_ = nullptr;
};

/// Vector-valued residual function over the problem variables, either
/// equality (= 0) or inequality (<= 0) for every row.
class ConstraintBlock {
 public:
  ConstraintBlock(std::string name, ConstraintKind kind, std::size_t rows)
      : name_(std::move(name)), kind_(kind), rows_(rows) {}
  virtual ~ConstraintBlock() = default;

  const std::string& name() const { return name_; }
  ConstraintKind kind() const { return kind_; }
  std::size_t rows() const { return rows_; }

  virtual void evaluate(std::span<const double> x, Evaluation& out) const = 0;
  virtual std::string row_label(std::size_t row) const;

 private:
  std::string name_;
  ConstraintKind kind_;
  std::size_t rows_;
};

struct Variable {
  std::string name;
  double lower = -infinity;
  double upper = infinity;
  double start = 0.0;
};

class NlpProblem {
 public:
  std::size_t add_variable(std::string name, double lower, double upper, double start = 0.0);
  std::size_t add_block(std::unique_ptr<ConstraintBlock> block);
  /// The objective is a one-row block; its kind is ignored.
  void set_objective(std::unique_ptr<ConstraintBlock> objective);

  const std::vector<Variable>& variables() const { return variables_; }
  std::size_t variable_count() const { return variables_.size(); }
  void set_start(std::size_t var, double value) { variables_.at(var).start = value; }
  void set_bounds(std::size_t var, double lower, double upper);
  std::vector<double> start_point() const;

  const ConstraintBlock& objective() const { return *objective_; }
  bool has_objective() const { return objective_ != nullptr; }
  const std::vector<std::unique_ptr<ConstraintBlock>>& blocks() const { return blocks_; }
  std::size_t constraint_count() const;

  /// Throws std::invalid_argument on duplicate names, inverted bounds or a
  /// missing objective.
  void validate() const;

 private:
  std::vector<Variable> variables_;
  std::vector<std::unique_ptr<ConstraintBlock>> blocks_;
  std::unique_ptr<ConstraintBlock> objective_;
};

using Coordinate = std::pair<std::size_t, std::size_t>;

/// Flattened view of an NlpProblem: all constraint rows in block order, a
/// fixed Jacobian pattern (row, var) and a fixed lower-triangular Hessian
/// pattern (var_a >= var_b).
class ProblemEvaluator {
 public:
  explicit ProblemEvaluator(const NlpProblem& problem);

  std::size_t n() const { return problem_->variable_count(); }
  std::size_t m() const { return row_kind_.size(); }
  const NlpProblem& problem() const { return *problem_; }

  double objective(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> grad) const;
  void constraints(std::span<const double> x, std::span<double> c) const;

  const std::vector<Coordinate>& jacobian_pattern() const { return jac_pattern_; }
  void jacobian_values(std::span<const double> x, std::span<double> values) const;

  const std::vector<Coordinate>& hessian_pattern() const { return hess_pattern_; }
  void hessian_values(std::span<const double> x, double objective_factor,
                      std::span<const double> multipliers, std::span<double> values) const;

  ConstraintKind row_kind(std::size_t row) const { return row_kind_[row]; }
  std::size_t row_block(std::size_t row) const { return row_block_[row]; }
  std::size_t block_offset(std::size_t block) const { return block_row_offset_[block]; }
  std::string row_label(std::size_t row) const;

 private:
  struct BlockPattern {
    std::vector<Coordinate> jac;   // local row, var
    std::vector<Coordinate> hess;  // var_a >= var_b
  };

  void evaluate_block(const ConstraintBlock& block, const BlockPattern& pattern,
                      std::span<const double> x, std::span<double> residual, double* jac_values,
                      double* hess_values, std::span<const double> weights) const;

  const NlpProblem* problem_;
  BlockPattern objective_pattern_;
  std::vector<BlockPattern> block_patterns_;
  std::vector<std::size_t> block_row_offset_;
  std::vector<std::size_t> block_jac_offset_;
  std::vector<std::size_t> block_hess_offset_;
  std::vector<ConstraintKind> row_kind_;
  std::vector<std::size_t> row_block_;
  std::vector<Coordinate> jac_pattern_;
  std::vector<Coordinate> hess_pattern_;
};

/// `acceptable`: the strict tolerances were not reached, but the returned
/// iterate meets the relaxed `acceptable_*` tolerances.
enum class SolveStatus { optimal, acceptable, infeasible, iteration_limit, numerical_failure };

const char* to_string(SolveStatus status);

struct SolverOptions {
  double tol_kkt = 1e-6;
  double tol_feas = 1e-6;
  int max_iterations = 500;
  double mu_init = 0.1;
  double mu_factor = 0.2;
  /// Relaxed tolerances. When the iterates stall after meeting them, or the
  /// iteration limit is hit, the best such iterate is returned.
  double acceptable_kkt = 1e-5;
  double acceptable_feas = 1e-6;
  int acceptable_window = 30;
  /// Overrides the variables' start values when present (projected into bounds).
  std::optional<std::vector<double>> start;
  /// Per-iteration log sink; nullptr disables logging.
  std::ostream* log = nullptr;
};

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<double> x;
  /// One multiplier per constraint row (inequality multipliers are >= 0).
  std::vector<double> multipliers;
  /// z_upper - z_lower per variable.
  std::vector<double> bound_multipliers;
  double kkt_stationarity = infinity;
  double kkt_feasibility = infinity;
  double kkt_complementarity = infinity;
  std::size_t iterations = 0;
  double objective_value = 0.0;
  /// Constraint block with the largest violation at the returned point.
  std::string worst_block;
  double worst_violation = 0.0;
  std::string message;
  double solve_seconds = 0.0;
};

/// Primal-dual interior-point method with a logarithmic barrier on bounds
/// and inequality slacks. Deterministic for identical inputs.
SolveReport solve(const NlpProblem& problem, const SolverOptions& options = {});

/// Largest violation of any row, with the owning block's name.
std::pair<std::string, double> worst_violation(const ProblemEvaluator& evaluator,
                                               std::span<const double> constraint_values);

struct DerivativeEntry {
  std::string block;
  std::string row;
  std::string variable;
  std::string variable_b;  // Hessian checks only
  double analytic = 0.0;
  double finite_difference = 0.0;
  double relative_error = 0.0;
};

struct DerivativeReport {
  double max_relative_error = 0.0;
  DerivativeEntry worst;
  double hessian_max_relative_error = 0.0;
  DerivativeEntry hessian_worst;
  std::size_t entries_checked = 0;
};

/// Compares every analytic first derivative (objective gradient and all
/// constraint Jacobians) against central differences with step
/// 1e-6 * (1 + |x_i|); relative error is |fd - analytic| / max(1, |analytic|).
/// With check_hessian the lambda-weighted Hessian is compared against central
/// differences of the analytic Jacobian using random multipliers.
DerivativeReport check_derivatives(const NlpProblem& problem, std::span<const double> point,
                                   bool check_hessian = false);

}  // namespace tscopf::nlp
