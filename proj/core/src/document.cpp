#include "lexpath/document.hpp"

#include "lexpath/pack_json.hpp"

namespace lexpath {

using nlohmann::json;

std::string_view to_string(DocumentFormat format) noexcept {
  return format == DocumentFormat::Json ? "json" : "dsl";
}

bool is_valid_utf8(std::string_view text, std::size_t* error_offset) noexcept {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      if (error_offset) *error_offset = i;
      return false;
    }
    if (i + len > n) {
      if (error_offset) *error_offset = i;
      return false;
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) {
        if (error_offset) *error_offset = i;
        return false;
      }
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      if (error_offset) *error_offset = i;
      return false;
    }
    i += len;
  }
  return true;
}

namespace {

std::size_t first_significant(std::string_view text) {
  std::size_t i = text.starts_with("\xEF\xBB\xBF") ? 3 : 0;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r' || text[i] == '\n')) ++i;
  return i;
}

Location location_of_offset(std::string_view text, std::size_t offset) {
  Location loc{1, 1, {}};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

Location locate(const std::map<std::string, Location>& index, const std::string& pointer) {
  std::string p = pointer;
  while (true) {
    if (auto it = index.find(p); it != index.end()) return Location{it->second.line, it->second.column, pointer};
    const auto slash = p.rfind('/');
    if (p.empty() || slash == std::string::npos) break;
    p.resize(slash);
  }
  return Location{0, 0, pointer};
}

}  // namespace

std::optional<DocumentFormat> detect_format(std::string_view text) noexcept {
  const std::size_t i = first_significant(text);
  if (i >= text.size()) return DocumentFormat::Dsl;
  if (text[i] == '{') return DocumentFormat::Json;
  if (text[i] == '#') return DocumentFormat::Dsl;
  std::size_t end = i;
  while (end < text.size() && text[end] >= 'A' && text[end] <= 'Z') ++end;
  const auto word = text.substr(i, end - i);
  const bool word_ends = end == text.size() || text[end] == ' ' || text[end] == '\t' || text[end] == '\n' ||
                         text[end] == '\r' || text[end] == '"' || text[end] == '{';
  if (word_ends && (word == "PACK" || word == "EVIDENCE" || word == "PATH")) return DocumentFormat::Dsl;
  return std::nullopt;
}

std::optional<DocumentFormat> format_for_extension(std::string_view file_name) noexcept {
  if (file_name.ends_with(".lexpath")) return DocumentFormat::Dsl;
  if (file_name.ends_with(".json")) return DocumentFormat::Json;
  return std::nullopt;
}

ParseResult parse_json_document(std::string_view text) {
  ParseResult result;
  std::size_t bad = 0;
  if (!is_valid_utf8(text, &bad)) {
    result.diagnostics.push_back(make_error("document is not valid UTF-8", location_of_offset(text, bad)));
    return result;
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    std::string message = e.what();
    if (auto p = message.find("parse error"); p != std::string::npos) message = message.substr(p);
    result.diagnostics.push_back(make_error("invalid JSON: " + message, location_of_offset(text, offset)));
    return result;
  }

  const auto index = index_json_locations(text);
  std::vector<Diagnostic> diagnostics;
  auto pack = pack_from_json(value, diagnostics);
  if (pack) {
    auto validation = validate_pack(*pack);
    diagnostics.insert(diagnostics.end(), validation.begin(), validation.end());
  }
  for (auto& d : diagnostics) d.location = locate(index, d.location.pointer);
  result.diagnostics = std::move(diagnostics);
  if (pack && !has_errors(result.diagnostics)) result.pack = std::move(pack);
  return result;
}

ParseResult parse_document(const PathDocument& document) {
  auto format = document.format ? document.format : detect_format(document.raw_text);
  if (!format) {
    ParseResult result;
    result.diagnostics.push_back(make_error(
        "cannot determine document format: expected '{' (JSON) or a PACK header (DSL); declare the format explicitly",
        location_of_offset(document.raw_text, first_significant(document.raw_text))));
    return result;
  }
  try {
    return *format == DocumentFormat::Json ? parse_json_document(document.raw_text) : parse_dsl(document.raw_text);
  } catch (const std::exception& e) {
    ParseResult result;
    result.diagnostics.push_back(make_error(std::string("internal parser failure: ") + e.what(), Location{1, 1, {}}));
    return result;
  }
}

std::string serialize_pack(const JurisdictionPack& pack, DocumentFormat format) {
  return format == DocumentFormat::Json ? canonical_json(pack) : write_dsl(pack);
}

}  // namespace lexpath
