#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexpath {

enum class Severity { Error, Warning };

/// Where a diagnostic points. Documents parsed from text carry a 1-based
/// line/column; diagnostics produced on the IR carry a JSON pointer. Both may
/// be present when a pointer could be mapped back to source text.
struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string pointer;

  bool has_position() const noexcept { return line != 0; }
  bool operator==(const Location&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::Error;
  Location location;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

Diagnostic make_error(std::string message, Location location = {});
Diagnostic make_warning(std::string message, Location location = {});

bool has_errors(std::span<const Diagnostic> diagnostics) noexcept;
std::size_t count_errors(std::span<const Diagnostic> diagnostics) noexcept;

std::string_view to_string(Severity severity) noexcept;

/// Renders `file:line:col: error: message`. The pointer is appended in
/// brackets when present; the file prefix is dropped when `file` is empty.
std::string format_diagnostic(const Diagnostic& diagnostic, std::string_view file = {});

}  // namespace lexpath
