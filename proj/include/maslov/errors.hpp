#pragma once

#include <stdexcept>
#include <string>

namespace maslov {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MASLOV_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

MASLOV_DEFINE_ERROR(DimensionMismatch)
MASLOV_DEFINE_ERROR(RankDeficient)
MASLOV_DEFINE_ERROR(NotLagrangian)
MASLOV_DEFINE_ERROR(InversionFailure)
MASLOV_DEFINE_ERROR(InvalidCoefficients)
MASLOV_DEFINE_ERROR(InvalidBoundaryConditions)
MASLOV_DEFINE_ERROR(OutsideSpectralInterval)
MASLOV_DEFINE_ERROR(WindowTouchesEssentialSpectrum)
MASLOV_DEFINE_ERROR(StepSizeUnderflow)
MASLOV_DEFINE_ERROR(ToleranceNotMet)
MASLOV_DEFINE_ERROR(RefinementLimit)
MASLOV_DEFINE_ERROR(IndeterminateCrossing)
MASLOV_DEFINE_ERROR(IndefiniteDirection)
MASLOV_DEFINE_ERROR(NonIsolatedIntersection)
MASLOV_DEFINE_ERROR(ShelfMismatch)
MASLOV_DEFINE_ERROR(AssumptionFailure)
MASLOV_DEFINE_ERROR(AmbiguousNearEndpoint)
MASLOV_DEFINE_ERROR(UnsupportedSystem)
MASLOV_DEFINE_ERROR(ResolutionTooCoarse)
MASLOV_DEFINE_ERROR(EvaluationError)
MASLOV_DEFINE_ERROR(IoError)

#undef MASLOV_DEFINE_ERROR

/// Configuration text error with a 1-based source position.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace maslov
