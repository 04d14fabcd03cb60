#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "breg/types.hpp"

namespace breg {

/// Caller supplied inconsistent or out-of-range arguments.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A linear-algebra kernel (SVD, factorization) did not succeed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A subproblem solver or line search gave up. Carries the best point found.
class SubproblemFailure : public std::runtime_error {
 public:
  SubproblemFailure(const std::string& what, Vector best = {})
      : std::runtime_error(what), best_(std::move(best)) {}

  const Vector& best_iterate() const { return best_; }

 private:
  Vector best_;
};

}  // namespace breg
