#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mulreg {

enum class ErrorKind {
  InvalidArgument,
  NonCubicSampleSize,
  UnknownFunctionId,
  WindowOutOfDomain,
  EmptyWindow,
  SingularDesign,
  NonPositiveAhat,
  InvalidBounds,
  EmptyPosteriorSupport,
  NonConvergence,
  DegenerateGrid,
  ReplicationFailure,
  Config,
};

std::string_view to_string(ErrorKind kind);

//! Validation errors reject a request before any estimation runs; every other
//! kind is raised while estimating.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what)
    , kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace mulreg
