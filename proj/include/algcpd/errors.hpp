#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace algcpd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Input is structurally valid but carries no information (e.g. zero matrix).
class DegenerateInput : public Error {
public:
  using Error::Error;
};

/// A size guard tripped (subset enumeration, Gram dimension, dense assembly).
class ResourceLimit : public Error {
public:
  using Error::Error;
};

/// A checkable sufficient condition did not hold for this input.
///
/// Carries the kernel dimension that was actually found (or -1 when the
/// failure is not about a kernel) and the smallest eigenvalues seen, so a
/// caller iterating over `l` can log why a value was insufficient.
class ConditionViolation : public Error {
public:
  ConditionViolation(const std::string& what, long found_dim = -1,
                     std::vector<double> eigen_tail = {})
      : Error(what), found_dim_(found_dim), eigen_tail_(std::move(eigen_tail)) {}

  long found_dim() const noexcept { return found_dim_; }
  const std::vector<double>& eigen_tail() const noexcept { return eigen_tail_; }

private:
  long found_dim_;
  std::vector<double> eigen_tail_;
};

/// A kernel vector was not (numerically) a symmetric rank-one power.
class NotAPower : public ConditionViolation {
public:
  using ConditionViolation::ConditionViolation;
};

/// A postcondition check (residual, rank-one fit) failed after a phase ran.
class VerificationFailure : public Error {
public:
  using Error::Error;
};

class RankDeficiency : public Error {
public:
  using Error::Error;
};

/// Pencil eigenvalues kept colliding after all retries.
class Degeneracy : public Error {
public:
  using Error::Error;
};

class ComplexEigenvalues : public Degeneracy {
public:
  using Degeneracy::Degeneracy;
};

/// Hyperplane search ran out of budget before finding every column.
class RecoveryFailure : public Error {
public:
  using Error::Error;
};

}  // namespace algcpd
