#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexpath {

/// MAJOR.MINOR.PATCH pack version. Pre-release and build suffixes are not
/// part of the pack versioning scheme.
struct Version {
  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::uint64_t patch = 0;

  static std::optional<Version> parse(std::string_view text);
  std::string to_string() const;

  Version next_major() const { return {major + 1, 0, 0}; }
  Version next_minor() const { return {major, minor + 1, 0}; }
  Version next_patch() const { return {major, minor, patch + 1}; }

  auto operator<=>(const Version&) const = default;
};

/// A conjunction of comparators, written the way package managers do:
///   `*`, `1.0.0` (exact), `^1`, `^1.2.3`, `~1.2`, `1` / `1.2` (partial),
///   `>=1.0.0, <2.0.0`.
class VersionConstraint {
 public:
  static std::optional<VersionConstraint> parse(std::string_view text);
  static VersionConstraint any();

  bool matches(const Version& version) const noexcept;
  const std::string& text() const noexcept { return text_; }

 private:
  enum class Op { Eq, Lt, Le, Gt, Ge };
  struct Comparator {
    Op op;
    Version version;
  };

  std::string text_;
  std::vector<Comparator> comparators_;
};

}  // namespace lexpath
