#include "lexpath/evidence.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "lexpath/error.hpp"
#include "lexpath/hash.hpp"

namespace lexpath {

using nlohmann::json;

JsonLines parse_json_lines(std::string_view text) {
  JsonLines out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      out.records.push_back({line_no, json::parse(line)});
    } catch (const json::exception& e) {
      out.diagnostics.push_back(
          make_error(std::string("malformed JSON line: ") + e.what(), Location{line_no, 1, {}}));
    }
  }
  return out;
}

json to_json(const EvidenceRecord& record) {
  return json{
      {"evidence_id", record.evidence_id},
      {"note", record.note},
      {"payload_digest", record.payload_digest},
      {"record_id", record.record_id},
      {"source", json{{"kind", std::string(to_string(record.source.kind))}, {"source_id", record.source.source_id}}},
      {"timestamp", format_timestamp(record.timestamp)},
  };
}

std::string to_json_lines(std::span<const EvidenceRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::optional<EvidenceRecord> record_from_json(const json& value, std::vector<Diagnostic>& diagnostics,
                                               const Location& location) {
  const std::size_t before = count_errors(diagnostics);
  const auto fail = [&](const std::string& message) { diagnostics.push_back(make_error(message, location)); };
  if (!value.is_object()) {
    fail("evidence record must be a JSON object");
    return std::nullopt;
  }
  EvidenceRecord record;
  const auto text_field = [&](const char* key, std::string& out, bool required) {
    auto it = value.find(key);
    if (it == value.end()) {
      if (required) fail(std::string("evidence record is missing '") + key + "'");
      return;
    }
    if (!it->is_string()) {
      fail(std::string("'") + key + "' must be a string");
      return;
    }
    out = it->get<std::string>();
    if (required && out.empty()) fail(std::string("'") + key + "' must not be empty");
  };
  text_field("record_id", record.record_id, true);
  text_field("evidence_id", record.evidence_id, true);
  text_field("note", record.note, false);
  text_field("payload_digest", record.payload_digest, true);
  if (!record.payload_digest.empty() && !is_sha256_hex(record.payload_digest)) {
    fail("payload_digest must be 64 lowercase hex characters (SHA-256)");
  }

  std::string ts;
  text_field("timestamp", ts, true);
  if (!ts.empty()) {
    if (auto parsed = parse_timestamp(ts)) {
      record.timestamp = *parsed;
    } else {
      fail("timestamp '" + ts + "' is not ISO-8601");
    }
  }

  auto src = value.find("source");
  if (src == value.end() || !src->is_object()) {
    fail("evidence record needs a 'source' object");
  } else {
    auto kind = src->find("kind");
    auto id = src->find("source_id");
    std::optional<SourceType> type;
    if (kind != src->end() && kind->is_string()) type = parse_source_type(kind->get<std::string>());
    if (!type) {
      fail("source.kind must be one of SENSOR, GEOSPATIAL, DOCUMENT, MANUAL");
    } else {
      record.source.kind = *type;
    }
    if (id == src->end() || !id->is_string() || id->get<std::string>().empty()) {
      fail("source.source_id must be a non-empty string");
    } else {
      record.source.source_id = id->get<std::string>();
    }
  }
  for (const auto& [key, _] : value.items()) {
    static const std::set<std::string, std::less<>> known = {"record_id", "evidence_id", "source",
                                                              "timestamp", "payload_digest", "note"};
    if (!known.count(key)) diagnostics.push_back(make_warning("unknown field '" + key + "'", location));
  }
  if (count_errors(diagnostics) != before) return std::nullopt;
  return record;
}

namespace {

struct Located {
  EvidenceRecord record;
  Location location;
};

std::set<std::string, std::less<>> evidence_ids(const JurisdictionPack& pack) {
  std::set<std::string, std::less<>> ids;
  for (const auto& path : pack.paths) {
    for_each_node(path.root, [&](const CriterionNode& node, std::size_t) {
      for (const auto& spec : node.evidence_specs) ids.insert(spec.evidence_id);
    });
  }
  return ids;
}

IngestResult ingest_located(std::vector<Located> items, std::vector<Diagnostic> diagnostics,
                            const JurisdictionPack* pack) {
  if (pack) {
    const auto known = evidence_ids(*pack);
    std::erase_if(items, [&](const Located& item) {
      if (known.count(item.record.evidence_id)) return false;
      diagnostics.push_back(make_error("record '" + item.record.record_id + "' references unknown evidence '" +
                                           item.record.evidence_id + "'; dropped",
                                       item.location));
      return true;
    });
  }

  std::stable_sort(items.begin(), items.end(), [](const Located& a, const Located& b) {
    return std::tie(a.record.timestamp, a.record.record_id) < std::tie(b.record.timestamp, b.record.record_id);
  });

  using Key = std::tuple<std::string, SourceType, std::string, std::string, Timestamp>;
  std::set<Key> seen_content;
  std::set<std::string, std::less<>> seen_ids;
  IngestResult result;
  for (auto& item : items) {
    const auto& r = item.record;
    Key key{r.evidence_id, r.source.kind, r.source.source_id, r.payload_digest, r.timestamp};
    if (!seen_content.insert(key).second) {
      diagnostics.push_back(make_warning("duplicate collapsed: record '" + r.record_id + "' repeats an earlier observation of '" +
                                             r.evidence_id + "'",
                                         item.location));
      continue;
    }
    if (!seen_ids.insert(r.record_id).second) {
      diagnostics.push_back(
          make_error("record_id '" + r.record_id + "' is used by two different observations; dropped", item.location));
      continue;
    }
    result.records.push_back(std::move(item.record));
  }
  result.diagnostics = std::move(diagnostics);
  return result;
}

}  // namespace

IngestResult ingest(std::span<const RawRecord> raw, const JurisdictionPack* pack) {
  std::vector<Located> items;
  std::vector<Diagnostic> diagnostics;
  for (const auto& r : raw) {
    const Location loc{r.line, r.line ? 1u : 0u, {}};
    if (auto rec = record_from_json(r.value, diagnostics, loc)) items.push_back({std::move(*rec), loc});
  }
  return ingest_located(std::move(items), std::move(diagnostics), pack);
}

IngestResult ingest(std::vector<EvidenceRecord> records, const JurisdictionPack* pack) {
  std::vector<Located> items;
  items.reserve(records.size());
  for (auto& r : records) items.push_back({std::move(r), {}});
  return ingest_located(std::move(items), {}, pack);
}

RoutedEvidence match_to_spec(std::span<const EvidenceRecord> records, const JurisdictionPack& pack) {
  struct Owner {
    const CriterionNode* node;
    const EvidenceSpec* spec;
  };
  std::map<std::string, Owner, std::less<>> owners;
  for (const auto& path : pack.paths) {
    for_each_node(path.root, [&](const CriterionNode& node, std::size_t) {
      for (const auto& spec : node.evidence_specs) {
        auto [it, inserted] = owners.emplace(spec.evidence_id, Owner{&node, &spec});
        if (!inserted && it->second.node->criterion_id != node.criterion_id) {
          throw Error(ErrorCode::AmbiguousEvidence, "evidence '" + spec.evidence_id + "' is declared under both '" +
                                                        it->second.node->criterion_id + "' and '" +
                                                        node.criterion_id + "'");
        }
      }
    });
  }

  RoutedEvidence out;
  for (const auto& record : records) {
    auto it = owners.find(record.evidence_id);
    if (it == owners.end()) {
      out.diagnostics.push_back(make_error("record '" + record.record_id + "' references unknown evidence '" +
                                           record.evidence_id + "'; excluded"));
      ++out.excluded;
      continue;
    }
    if (!it->second.spec->accepts(record.source.kind)) {
      out.diagnostics.push_back(make_error("record '" + record.record_id + "' comes from a " +
                                           std::string(to_string(record.source.kind)) + " source, which evidence '" +
                                           record.evidence_id + "' does not accept; excluded"));
      ++out.excluded;
      continue;
    }
    out.by_criterion[it->second.node->criterion_id].push_back(record);
  }
  return out;
}

}  // namespace lexpath
