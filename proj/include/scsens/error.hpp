#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scsens {

enum class ErrorKind {
  // input / validation
  Io,
  MissingCell,
  NonRectangular,
  UnknownUnit,
  UnknownPeriod,
  BadPeriodOrder,
  TooFewPrePeriods,
  TooFewUnits,
  TooFewPeriods,
  DimensionMismatch,
  DimensionTooLarge,
  InvalidArgument,
  // numerical
  ZeroNormal,
  Infeasible,
  NoConvergence,
  UndefinedMetric,
};

std::string_view to_string(ErrorKind kind);

/// True for kinds caused by the numerics rather than the input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace scsens
