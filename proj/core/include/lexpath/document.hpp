#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/diagnostic.hpp"
#include "lexpath/rule_ir.hpp"

namespace lexpath {

enum class DocumentFormat { Dsl, Json };

std::string_view to_string(DocumentFormat format) noexcept;

/// Raw text of a decision-path document. Leave `format` empty to detect it
/// from content; detection refuses to guess when the text is ambiguous.
struct PathDocument {
  std::string raw_text;
  std::optional<DocumentFormat> format;
};

struct ParseResult {
  std::optional<JurisdictionPack> pack;
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return pack.has_value(); }
};

/// Content sniffing: JSON starts with `{`, DSL with a keyword or `#` comment.
/// Whitespace-only text is treated as DSL (it has no paths either way).
std::optional<DocumentFormat> detect_format(std::string_view text) noexcept;

/// Format implied by a file name (`.lexpath` or `.json`), if any.
std::optional<DocumentFormat> format_for_extension(std::string_view file_name) noexcept;

/// Parses either concrete syntax into a validated pack. Any ERROR (syntax,
/// unresolved reference, or validation) yields no pack. Never throws on
/// arbitrary input.
ParseResult parse_document(const PathDocument& document);

/// Deterministic serialization. JSON output is the canonical pack form; DSL
/// output is the `.lexpath` form accepted by parse_document.
std::string serialize_pack(const JurisdictionPack& pack, DocumentFormat format);

/// Lower-level entry points, exposed for tests and tools.
ParseResult parse_dsl(std::string_view text);
ParseResult parse_json_document(std::string_view text);
std::string write_dsl(const JurisdictionPack& pack);

/// Returns false and reports the byte offset of the first ill-formed sequence.
bool is_valid_utf8(std::string_view text, std::size_t* error_offset = nullptr) noexcept;

}  // namespace lexpath
