#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amm {

enum class ErrorKind {
  NonBinaryEntry,
  EmptyMatrix,
  RaggedRows,
  NonFiniteScore,
  TooFewAttributes,
  DegenerateSplit,
  LengthMismatch,
  InvalidArgument,
  OutOfRange,
  ParseError,
  HeaderMismatch,
  IoFailure,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures surface as amm::Error; kind() names the failure class
// and what() starts with that name.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace amm
