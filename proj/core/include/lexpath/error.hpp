#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lexpath {

enum class ErrorCode {
  InvalidArgument,
  Io,
  NotFound,
  ValidationFailed,
  DuplicateVersion,
  UnknownTemplate,
  EmptyStatute,
  EndpointUnavailable,
  FixtureMiss,
  Timeout,
  DegenerateUpdate,
  UnknownEvidence,
  MissingLeafStatus,
  AmbiguousEvidence,
  ChainBroken,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure surfaced by lexpath carries one of
/// the codes above so callers (notably the CLI) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A trace whose hash chain does not verify. `index()` is the first event
/// that fails; it equals the event count when every event verifies but the
/// recorded head hash (or event count) does not match.
class ChainBrokenError : public Error {
 public:
  ChainBrokenError(std::size_t index, const std::string& message);

  std::size_t index() const noexcept { return index_; }
  std::optional<std::size_t> last_valid_index() const noexcept {
    if (index_ == 0) return std::nullopt;
    return index_ - 1;
  }

 private:
  std::size_t index_;
};

}  // namespace lexpath
