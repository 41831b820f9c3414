#pragma once

#include <stdexcept>
#include <string>

namespace tscopf {

enum class ErrorCode {
  parse,
  validation,
  domain,
  unsupported,
  singular,
  integration,
  index,
  io,
  stage_failure,
};

/// Base class for every error raised by the library. The code is what the C
/// API reports; the message is what a user reads.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCode::parse, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCode::validation, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class UnsupportedFeatureError : public Error {
 public:
  explicit UnsupportedFeatureError(const std::string& what) : Error(ErrorCode::unsupported, what) {}
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double rcond)
      : Error(ErrorCode::singular, what), rcond_(rcond) {}
  double condition_estimate() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : Error(ErrorCode::integration, what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error(ErrorCode::index, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

/// A step of a multi-stage study failed. `cause` is the code of the
/// underlying error, or stage_failure when a solver returned without a
/// usable point; `infeasible` is set when that solver reported infeasibility.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, ErrorCode cause, bool infeasible = false)
      : Error(ErrorCode::stage_failure, stage + ": " + what),
        stage_(std::move(stage)),
        cause_(cause),
        infeasible_(infeasible) {}
  const std::string& stage() const noexcept { return stage_; }
  ErrorCode cause() const noexcept { return cause_; }
  bool infeasible() const noexcept { return infeasible_; }

 private:
  std::string stage_;
  ErrorCode cause_;
  bool infeasible_;
};

}  // namespace tscopf
