#include "scsens/error.hpp"

namespace scsens {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "Io";
    case ErrorKind::MissingCell: return "MissingCell";
    case ErrorKind::NonRectangular: return "NonRectangular";
    case ErrorKind::UnknownUnit: return "UnknownUnit";
    case ErrorKind::UnknownPeriod: return "UnknownPeriod";
    case ErrorKind::BadPeriodOrder: return "BadPeriodOrder";
    case ErrorKind::TooFewPrePeriods: return "TooFewPrePeriods";
    case ErrorKind::TooFewUnits: return "TooFewUnits";
    case ErrorKind::TooFewPeriods: return "TooFewPeriods";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ZeroNormal: return "ZeroNormal";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroNormal:
    case ErrorKind::Infeasible:
    case ErrorKind::NoConvergence:
    case ErrorKind::UndefinedMetric:
      return true;
    default:
      return false;
  }
}

}  // namespace scsens
