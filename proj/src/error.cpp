#include "hybreach/error.hpp"

namespace hybreach {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyCollection: return "EmptyCollection";
    case ErrorKind::EmptyNetwork: return "EmptyNetwork";
    case ErrorKind::DimensionChain: return "DimensionChain";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Undefined: return "Undefined";
    case ErrorKind::EmptySweep: return "EmptySweep";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Numerical: return "Numerical";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace hybreach
