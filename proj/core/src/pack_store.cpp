#include "lexpath/pack_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "lexpath/document.hpp"
#include "lexpath/error.hpp"
#include "lexpath/hash.hpp"
#include "lexpath/pack_json.hpp"

namespace lexpath {
namespace fs = std::filesystem;

namespace {

std::optional<std::string> read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const fs::path& file) {
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file " + file.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::Io, "cannot lock " + file.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

void write_atomically(const fs::path& target, std::string_view bytes) {
  std::random_device rd;
  const fs::path tmp = target.parent_path() / (".tmp-" + std::to_string(rd()) + "-" + target.filename().string());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move pack into place at " + target.string());
  }
}

}  // namespace

PackStore::PackStore(fs::path root) : root_(std::move(root)) {}

fs::path PackStore::file_for(std::string_view pack_id, const Version& version) const {
  return root_ / std::string(pack_id) / (version.to_string() + ".json");
}

std::vector<Version> PackStore::versions(std::string_view pack_id) const {
  std::vector<Version> out;
  if (!is_valid_pack_id(pack_id)) return out;
  const fs::path dir = root_ / std::string(pack_id);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (auto v = Version::parse(entry.path().stem().string())) out.push_back(*v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> PackStore::pack_ids() const {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) return out;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && is_valid_pack_id(name) && !versions(name).empty()) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

JurisdictionPack PackStore::load(std::string_view pack_id, const VersionConstraint& constraint) const {
  const auto all = versions(pack_id);
  auto it = std::find_if(all.rbegin(), all.rend(), [&](const Version& v) { return constraint.matches(v); });
  if (it == all.rend()) {
    throw Error(ErrorCode::NotFound,
                "no version of pack '" + std::string(pack_id) + "' satisfies '" + constraint.text() + "' in " +
                    root_.string());
  }
  const fs::path file = file_for(pack_id, *it);
  auto bytes = read_file(file);
  if (!bytes) throw Error(ErrorCode::Io, "cannot read " + file.string());

  auto parsed = parse_document(PathDocument{*bytes, DocumentFormat::Json});
  if (!parsed.pack) {
    std::string first = "unknown error";
    for (const auto& d : parsed.diagnostics) {
      if (d.severity == Severity::Error) {
        first = format_diagnostic(d);
        break;
      }
    }
    throw Error(ErrorCode::ValidationFailed, file.string() + ": " + first);
  }
  if (parsed.pack->pack_id != pack_id || Version::parse(parsed.pack->version) != *it) {
    throw Error(ErrorCode::ValidationFailed,
                file.string() + ": content declares " + parsed.pack->pack_id + "@" + parsed.pack->version);
  }
  return std::move(*parsed.pack);
}

JurisdictionPack PackStore::load(std::string_view pack_id, std::string_view constraint) const {
  auto parsed = VersionConstraint::parse(constraint);
  if (!parsed) throw Error(ErrorCode::InvalidArgument, "invalid version constraint '" + std::string(constraint) + "'");
  return load(pack_id, *parsed);
}

StoredVersion PackStore::store(const JurisdictionPack& pack) {
  const auto diagnostics = validate_pack(pack);
  if (has_errors(diagnostics)) {
    std::string first;
    for (const auto& d : diagnostics) {
      if (d.severity == Severity::Error) {
        first = format_diagnostic(d);
        break;
      }
    }
    throw Error(ErrorCode::ValidationFailed, "pack '" + pack.pack_id + "' is invalid: " + first);
  }
  const Version version = *Version::parse(pack.version);
  const fs::path dir = root_ / pack.pack_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string());

  const std::string bytes = canonical_json(pack);
  StoredVersion record{pack.pack_id, version.to_string(), file_for(pack.pack_id, version), sha256_hex(bytes), false};

  FileLock lock(dir / ".lock");
  if (fs::exists(record.file, ec)) {
    auto existing = read_file(record.file);
    if (existing && *existing == bytes) return record;
    throw Error(ErrorCode::DuplicateVersion,
                pack.pack_id + "@" + record.version + " is already stored with different content");
  }
  write_atomically(record.file, bytes);
  record.created = true;
  return record;
}

JurisdictionPack load_pack(const fs::path& location, std::string_view pack_id, std::string_view version_req) {
  return PackStore(location).load(pack_id, version_req);
}

StoredVersion store_pack(const fs::path& location, const JurisdictionPack& pack) {
  return PackStore(location).store(pack);
}

}  // namespace lexpath
