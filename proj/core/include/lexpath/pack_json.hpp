#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexpath/diagnostic.hpp"
#include "lexpath/rule_ir.hpp"

namespace lexpath {

nlohmann::json to_json(const JurisdictionPack& pack);

/// Canonical pack bytes: keys sorted, shortest round-trip numbers, UTF-8,
/// two-space indentation, trailing newline.
std::string canonical_json(const JurisdictionPack& pack);

/// Builds a pack from a JSON value. Missing or mistyped fields are ERROR
/// diagnostics, unknown fields are WARNINGs. Returns nullopt on any ERROR.
/// This does not run validate_pack.
std::optional<JurisdictionPack> pack_from_json(const nlohmann::json& value,
                                               std::vector<Diagnostic>& diagnostics);

/// Maps every JSON pointer in syntactically valid JSON text to the line and
/// column where its value starts.
std::map<std::string, Location> index_json_locations(std::string_view text);

/// Escapes one reference token for use in a JSON pointer.
std::string json_pointer_token(std::string_view token);

}  // namespace lexpath
