#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xidx {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or descriptor mismatch between operands.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (singular,
/// non-dissipative, non-self-adjoint, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge. Carries the residual history
/// that led to the failure.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// An eigenvalue sits on (or within tolerance of) a logarithm branch cut.
class BranchError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An operator path became singular at some parameter value.
class PathError : public DomainError {
 public:
  PathError(const std::string& what, double t) : DomainError(what), t_(t) {}

  double t() const noexcept { return t_; }

 private:
  double t_;
};

/// A boundary value K(H0 + i0)^{-1}K* does not exist.
class ExistenceError : public DomainError {
 public:
  ExistenceError(const std::string& what, double obstruction, std::vector<double> history)
      : DomainError(what), obstruction_(obstruction), history_(std::move(history)) {}

  /// Norm of the kernel component E_{H0}({0}) K*.
  double obstruction() const noexcept { return obstruction_; }
  /// Norms of K(H0 + i eps)^{-1}K* along the schedule.
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  double obstruction_;
  std::vector<double> history_;
};

}  // namespace xidx
