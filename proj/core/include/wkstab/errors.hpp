#pragma once

#include <stdexcept>
#include <string>

namespace wkstab {

// Stable machine-readable failure codes, grouped by surface.
enum class ErrorCode {
  // geometry
  UnboundedRegion,
  EmptyInterior,
  NonPrimitiveNormal,
  RedundantLabel,
  DimensionMismatch,
  // weights
  SyntaxError,
  UnknownVariable,
  DomainError,
  PositivityViolation,
  // quadrature
  NonFiniteIntegrand,
  // invariants
  SingularGram,
  NonConvexPieces,
  // abreu
  EvaluationOnBoundary,
  TooCloseToBoundary,
  // test configurations
  CapViolation,
  InsufficientSamples,
  // p1-bundle
  SingularSystem,
  Z0OutOfRange,
  // configuration
  SchemaError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

  // exit-status class used by the CLI: 2 = input/validation, 3 = computation
  bool is_validation() const {
    switch (code_) {
      case ErrorCode::NonFiniteIntegrand:
      case ErrorCode::SingularGram:
      case ErrorCode::SingularSystem:
      case ErrorCode::TooCloseToBoundary:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace wkstab
