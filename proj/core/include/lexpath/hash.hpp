#pragma once

#include <string>
#include <string_view>

namespace lexpath {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

bool is_sha256_hex(std::string_view text) noexcept;

}  // namespace lexpath
