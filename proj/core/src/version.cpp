#include "lexpath/version.hpp"

#include <charconv>

namespace lexpath {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_component(std::string_view text, std::uint64_t& out) {
  if (text.empty() || (text.size() > 1 && text.front() == '0')) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

// "1", "1.2", "1.2.3" -> components present (1..3); 0 on failure.
std::size_t parse_partial(std::string_view text, Version& out) {
  std::uint64_t parts[3] = {0, 0, 0};
  std::size_t count = 0;
  while (true) {
    const auto dot = text.find('.');
    const auto piece = text.substr(0, dot);
    if (count == 3 || !parse_component(piece, parts[count])) return 0;
    ++count;
    if (dot == std::string_view::npos) break;
    text.remove_prefix(dot + 1);
  }
  out = {parts[0], parts[1], parts[2]};
  return count;
}

}  // namespace

std::optional<Version> Version::parse(std::string_view text) {
  Version v;
  if (parse_partial(text, v) != 3) return std::nullopt;
  return v;
}

std::string Version::to_string() const {
  return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
}

VersionConstraint VersionConstraint::any() {
  VersionConstraint c;
  c.text_ = "*";
  return c;
}

std::optional<VersionConstraint> VersionConstraint::parse(std::string_view text) {
  VersionConstraint result;
  result.text_ = std::string(trim(text));
  std::string_view rest = result.text_;
  if (rest.empty() || rest == "*" || rest == "latest") return result;

  while (!rest.empty()) {
    auto sep = rest.find_first_of(", ");
    auto term = trim(rest.substr(0, sep));
    rest = sep == std::string_view::npos ? std::string_view{} : rest.substr(sep + 1);
    if (term.empty()) continue;

    Version v;
    std::size_t n = 0;
    auto lower_upper = [&](Version lo, Version hi) {
      result.comparators_.push_back({Op::Ge, lo});
      result.comparators_.push_back({Op::Lt, hi});
    };
    if (term.front() == '^') {
      n = parse_partial(term.substr(1), v);
      if (n == 0) return std::nullopt;
      if (v.major > 0 || n == 1) {
        lower_upper(v, v.next_major());
      } else if (v.minor > 0 || n == 2) {
        lower_upper(v, v.next_minor());
      } else {
        lower_upper(v, v.next_patch());
      }
    } else if (term.front() == '~') {
      n = parse_partial(term.substr(1), v);
      if (n == 0) return std::nullopt;
      lower_upper(v, n == 1 ? v.next_major() : v.next_minor());
    } else if (term.starts_with(">=") || term.starts_with("<=")) {
      if (parse_partial(trim(term.substr(2)), v) == 0) return std::nullopt;
      result.comparators_.push_back({term[0] == '>' ? Op::Ge : Op::Le, v});
    } else if (term.front() == '>' || term.front() == '<' || term.front() == '=') {
      if (parse_partial(trim(term.substr(1)), v) == 0) return std::nullopt;
      const Op op = term.front() == '>' ? Op::Gt : term.front() == '<' ? Op::Lt : Op::Eq;
      result.comparators_.push_back({op, v});
    } else {
      n = parse_partial(term, v);
      if (n == 0) return std::nullopt;
      if (n == 3) {
        result.comparators_.push_back({Op::Eq, v});
      } else {
        lower_upper(v, n == 1 ? v.next_major() : v.next_minor());
      }
    }
  }
  return result;
}

bool VersionConstraint::matches(const Version& version) const noexcept {
  for (const auto& c : comparators_) {
    const bool ok = [&] {
      switch (c.op) {
        case Op::Eq: return version == c.version;
        case Op::Lt: return version < c.version;
        case Op::Le: return version <= c.version;
        case Op::Gt: return version > c.version;
        case Op::Ge: return version >= c.version;
      }
      return false;
    }();
    if (!ok) return false;
  }
  return true;
}

}  // namespace lexpath
