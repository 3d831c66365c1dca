#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace lexpath {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Accepts `YYYY-MM-DDTHH:MM:SS[.fff]` followed by `Z` or a `+HH:MM`/`-HH:MM`
/// offset. Fractions beyond milliseconds are truncated.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Canonical UTC form: `YYYY-MM-DDTHH:MM:SSZ`, with `.mmm` only when the
/// millisecond part is non-zero.
std::string format_timestamp(Timestamp ts);

/// Durations such as `500ms`, `30s`, `5m`, `2h`, `1d`; a bare integer is seconds.
std::optional<std::chrono::milliseconds> parse_duration(std::string_view text);

Timestamp now_utc();

}  // namespace lexpath
