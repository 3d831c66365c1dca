#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/rule_ir.hpp"
#include "lexpath/version.hpp"

namespace lexpath {

struct StoredVersion {
  std::string pack_id;
  std::string version;
  std::filesystem::path file;
  std::string sha256;
  /// False when an identical (pack_id, version) was already present.
  bool created = false;
};

/// Directory-backed store of immutable pack versions laid out as
/// `<root>/<pack_id>/<version>.json`. Writes for one pack id are serialised
/// with an advisory file lock; readers never lock.
class PackStore {
 public:
  explicit PackStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Highest stored version satisfying `constraint`. Throws NotFound when no
  /// version matches and ValidationFailed when the selected file does not
  /// parse or validate.
  JurisdictionPack load(std::string_view pack_id, const VersionConstraint& constraint) const;
  JurisdictionPack load(std::string_view pack_id, std::string_view constraint) const;

  /// Persists a validated pack. Re-storing identical bytes is a no-op;
  /// different bytes under an existing version throw DuplicateVersion.
  StoredVersion store(const JurisdictionPack& pack);

  /// Stored versions of `pack_id`, ascending. Files whose names are not
  /// versions are ignored.
  std::vector<Version> versions(std::string_view pack_id) const;
  std::vector<std::string> pack_ids() const;

  std::filesystem::path file_for(std::string_view pack_id, const Version& version) const;

 private:
  std::filesystem::path root_;
};

JurisdictionPack load_pack(const std::filesystem::path& location, std::string_view pack_id,
                           std::string_view version_req);
StoredVersion store_pack(const std::filesystem::path& location, const JurisdictionPack& pack);

}  // namespace lexpath
