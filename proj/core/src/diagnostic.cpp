#include "lexpath/diagnostic.hpp"

#include <algorithm>

namespace lexpath {

Diagnostic make_error(std::string message, Location location) {
  return {Severity::Error, std::move(location), std::move(message)};
}

Diagnostic make_warning(std::string message, Location location) {
  return {Severity::Warning, std::move(location), std::move(message)};
}

bool has_errors(std::span<const Diagnostic> diagnostics) noexcept {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::size_t count_errors(std::span<const Diagnostic> diagnostics) noexcept {
  return static_cast<std::size_t>(std::count_if(
      diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

std::string_view to_string(Severity severity) noexcept {
  return severity == Severity::Error ? "error" : "warning";
}

std::string format_diagnostic(const Diagnostic& diagnostic, std::string_view file) {
  std::string out;
  if (!file.empty()) {
    out += file;
    out += ':';
  }
  if (diagnostic.location.has_position()) {
    out += std::to_string(diagnostic.location.line);
    out += ':';
    out += std::to_string(diagnostic.location.column);
    out += ':';
  }
  if (!out.empty()) out += ' ';
  out += to_string(diagnostic.severity);
  out += ": ";
  out += diagnostic.message;
  if (!diagnostic.location.pointer.empty()) {
    out += " [";
    out += diagnostic.location.pointer;
    out += ']';
  }
  return out;
}

}  // namespace lexpath
