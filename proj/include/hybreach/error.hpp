#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hybreach {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  EmptyCollection,
  EmptyNetwork,
  DimensionChain,
  NonFinite,
  Parse,
  Undefined,
  EmptySweep,
  Config,
  Numerical,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hybreach
