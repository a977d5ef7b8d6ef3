#include "amm/error.hpp"

namespace amm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonBinaryEntry: return "NonBinaryEntry";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::NonFiniteScore: return "NonFiniteScore";
    case ErrorKind::TooFewAttributes: return "TooFewAttributes";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace amm
