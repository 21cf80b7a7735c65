#pragma once

#include <stdexcept>
#include <string>

namespace fqw {

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller broke an API contract (bad flag, mismatched step, unsupported request).
class UsageError : public Error {
  public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

/// Argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A numerical invariant (unitarity, light cone, density-matrix validity) failed.
class InvariantViolation : public Error {
  public:
    explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

class FitError : public Error {
  public:
    enum class Kind { InsufficientSamples, NonPositiveValues };

    FitError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

}  // namespace fqw
