#include "mulreg/error.hpp"

namespace mulreg {

std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::NonCubicSampleSize: return "NonCubicSampleSize";
  case ErrorKind::UnknownFunctionId: return "UnknownFunctionId";
  case ErrorKind::WindowOutOfDomain: return "WindowOutOfDomain";
  case ErrorKind::EmptyWindow: return "EmptyWindow";
  case ErrorKind::SingularDesign: return "SingularDesign";
  case ErrorKind::NonPositiveAhat: return "NonPositiveAhat";
  case ErrorKind::InvalidBounds: return "InvalidBounds";
  case ErrorKind::EmptyPosteriorSupport: return "EmptyPosteriorSupport";
  case ErrorKind::NonConvergence: return "NonConvergence";
  case ErrorKind::DegenerateGrid: return "DegenerateGrid";
  case ErrorKind::ReplicationFailure: return "ReplicationFailure";
  case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind)
{
  switch (kind) {
  case ErrorKind::InvalidArgument:
  case ErrorKind::NonCubicSampleSize:
  case ErrorKind::UnknownFunctionId:
  case ErrorKind::WindowOutOfDomain:
  case ErrorKind::InvalidBounds:
  case ErrorKind::DegenerateGrid:
  case ErrorKind::Config:
    return true;
  default:
    return false;
  }
}

} // namespace mulreg
