#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexpath/diagnostic.hpp"
#include "lexpath/rule_ir.hpp"
#include "lexpath/timestamp.hpp"

namespace lexpath {

struct SourceKind {
  SourceType kind = SourceType::Manual;
  std::string source_id;

  bool operator==(const SourceKind&) const = default;
};

/// One observation reported by an upstream system. Only the digest of the
/// raw payload is kept; the pack's likelihood row carries its evidential weight.
struct EvidenceRecord {
  std::string record_id;
  std::string evidence_id;
  SourceKind source;
  Timestamp timestamp{};
  std::string payload_digest;
  std::string note;

  bool operator==(const EvidenceRecord&) const = default;
};

/// A JSON value together with the line it came from (1-based, 0 if unknown).
struct RawRecord {
  std::size_t line = 0;
  nlohmann::json value;
};

struct JsonLines {
  std::vector<RawRecord> records;
  std::vector<Diagnostic> diagnostics;
};

/// Splits JSON Lines text. Blank lines are skipped; unparsable lines become
/// ERROR diagnostics.
JsonLines parse_json_lines(std::string_view text);

nlohmann::json to_json(const EvidenceRecord& record);
std::string to_json_lines(std::span<const EvidenceRecord> records);

/// Decodes one record; returns nullopt and appends ERRORs when malformed.
std::optional<EvidenceRecord> record_from_json(const nlohmann::json& value,
                                               std::vector<Diagnostic>& diagnostics,
                                               const Location& location = {});

struct IngestResult {
  std::vector<EvidenceRecord> records;
  std::vector<Diagnostic> diagnostics;
};

/// Orders a batch of observations by (timestamp, record_id), collapses exact
/// duplicates with a WARNING, and drops malformed records, repeated record
/// ids, and (when `pack` is given) records naming unknown evidence, each
/// with an ERROR.
IngestResult ingest(std::span<const RawRecord> raw, const JurisdictionPack* pack = nullptr);
IngestResult ingest(std::vector<EvidenceRecord> records, const JurisdictionPack* pack = nullptr);

struct RoutedEvidence {
  /// criterion_id -> observations in input order. Criteria without
  /// observations are absent.
  std::map<std::string, std::vector<EvidenceRecord>, std::less<>> by_criterion;
  std::vector<Diagnostic> diagnostics;
  std::size_t excluded = 0;
};

/// Routes each record to the leaf criterion that owns its evidence id.
/// Records with unknown evidence ids or sources the spec does not accept are
/// excluded with diagnostics. Throws AmbiguousEvidence if the pack declares
/// an evidence id under more than one criterion.
RoutedEvidence match_to_spec(std::span<const EvidenceRecord> records, const JurisdictionPack& pack);

}  // namespace lexpath
