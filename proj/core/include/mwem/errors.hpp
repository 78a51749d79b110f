#pragma once

#include <stdexcept>
#include <string>

namespace mwem {

// Base type for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid values, mismatched universes, violated preconditions on data.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration (T > |Q|, bad flag combinations, malformed config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A ledger charge would exceed the privacy budget cap.
class BudgetExhaustedError : public Error {
 public:
  using Error::Error;
};

// An operation would exceed a memory/size cap (explicit domain too large, part merge too big).
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Relative entropy is infinite (approximation has zero mass where the truth has support).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace mwem
