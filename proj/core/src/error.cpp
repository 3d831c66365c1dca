#include "lexpath/error.hpp"

namespace lexpath {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::DuplicateVersion: return "DuplicateVersion";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::EmptyStatute: return "EmptyStatute";
    case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::DegenerateUpdate: return "DegenerateUpdate";
    case ErrorCode::UnknownEvidence: return "UnknownEvidence";
    case ErrorCode::MissingLeafStatus: return "MissingLeafStatus";
    case ErrorCode::AmbiguousEvidence: return "AmbiguousEvidence";
    case ErrorCode::ChainBroken: return "ChainBroken";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ChainBrokenError::ChainBrokenError(std::size_t index, const std::string& message)
    : Error(ErrorCode::ChainBroken, "at event " + std::to_string(index) + ": " + message), index_(index) {}

}  // namespace lexpath
