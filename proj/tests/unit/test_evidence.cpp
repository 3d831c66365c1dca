#include <doctest.h>

#include "helpers.hpp"
#include "lexpath/evidence.hpp"
#include "lexpath/hash.hpp"

using namespace lexpath;
namespace tk = lexpath::testkit;

namespace {

std::string line(const EvidenceRecord& r) { return to_json(r).dump() + "\n"; }

bool mentions(const std::vector<Diagnostic>& ds, const std::string& fragment, Severity severity) {
  for (const auto& d : ds) {
    if (d.severity == severity && d.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("JSON lines: blank lines skipped, bad lines reported with line numbers") {
  const auto text = line(tk::make_record("r1", "ea", SourceType::Sensor, "2024-01-01T00:00:00Z")) + "\n   \n{oops\n";
  const auto jl = parse_json_lines(text);
  CHECK(jl.records.size() == 1);
  CHECK(jl.records[0].line == 1);
  REQUIRE(jl.diagnostics.size() == 1);
  CHECK(jl.diagnostics[0].location.line == 4);
  CHECK(jl.diagnostics[0].severity == Severity::Error);
}

TEST_CASE("record JSON round-trips") {
  auto r = tk::make_record("r1", "ea", SourceType::Geospatial, "2024-01-01T00:00:00.5Z");
  r.note = "n";
  std::vector<Diagnostic> ds;
  const auto back = record_from_json(to_json(r), ds);
  REQUIRE(back);
  CHECK(*back == r);
  CHECK(ds.empty());
  const std::vector<EvidenceRecord> both{r, r};
  CHECK(to_json_lines(both) == line(r) + line(r));
}

TEST_CASE("record validation") {
  const auto base = to_json(tk::make_record("r1", "ea", SourceType::Sensor, "2024-01-01T00:00:00Z"));
  const auto rejects = [&](const std::function<void(nlohmann::json&)>& edit) {
    auto j = base;
    edit(j);
    std::vector<Diagnostic> ds;
    return !record_from_json(j, ds) && has_errors(ds);
  };
  CHECK(rejects([](auto& j) { j.erase("record_id"); }));
  CHECK(rejects([](auto& j) { j["evidence_id"] = ""; }));
  CHECK(rejects([](auto& j) { j["payload_digest"] = "abc"; }));
  CHECK(rejects([](auto& j) { j["timestamp"] = "yesterday"; }));
  CHECK(rejects([](auto& j) { j["source"]["kind"] = "RADAR"; }));
  CHECK(rejects([](auto& j) { j["source"] = "gps"; }));
  CHECK(rejects([](auto& j) { j = nlohmann::json::array(); }));

  auto j = base;
  j["confidence"] = 0.9;
  std::vector<Diagnostic> ds;
  CHECK(record_from_json(j, ds));
  CHECK(mentions(ds, "confidence", Severity::Warning));
}

TEST_CASE("ingest orders by timestamp then record id") {
  std::vector<EvidenceRecord> in = {
      tk::make_record("b", "ea", SourceType::Sensor, "2024-01-01T00:00:02Z"),
      tk::make_record("z", "ea", SourceType::Sensor, "2024-01-01T00:00:01Z"),
      tk::make_record("a", "eb", SourceType::Sensor, "2024-01-01T00:00:01Z"),
  };
  const auto out = ingest(in);
  REQUIRE(out.records.size() == 3);
  CHECK(out.records[0].record_id == "a");
  CHECK(out.records[1].record_id == "z");
  CHECK(out.records[2].record_id == "b");
  CHECK(out.diagnostics.empty());
}

TEST_CASE("ingest collapses exact duplicates and drops conflicting ids") {
  const auto r = tk::make_record("r1", "ea", SourceType::Sensor, "2024-01-01T00:00:00Z");
  SUBCASE("exact duplicate") {
    const auto out = ingest(std::vector<EvidenceRecord>{r, r});
    CHECK(out.records.size() == 1);
    CHECK(mentions(out.diagnostics, "duplicate", Severity::Warning));
    CHECK_FALSE(has_errors(out.diagnostics));
  }
  SUBCASE("same content under a new record id counts once") {
    auto copy = r;
    copy.record_id = "r2";
    const auto out = ingest(std::vector<EvidenceRecord>{r, copy});
    CHECK(out.records.size() == 1);
  }
  SUBCASE("same record id, different content") {
    auto other = r;
    other.payload_digest = sha256_hex("different");
    const auto out = ingest(std::vector<EvidenceRecord>{r, other});
    CHECK(out.records.size() == 1);
    CHECK(has_errors(out.diagnostics));
  }
}

TEST_CASE("ingest against a pack drops unknown evidence") {
  const auto pack = test::small_pack();
  const std::vector<EvidenceRecord> in = {tk::make_record("r1", "ea", SourceType::Sensor, "2024-01-01T00:00:00Z"),
                                          tk::make_record("r2", "zz", SourceType::Sensor, "2024-01-01T00:00:00Z")};
  const auto out = ingest(in, &pack);
  CHECK(out.records.size() == 1);
  CHECK(mentions(out.diagnostics, "zz", Severity::Error));
}

TEST_CASE("ingest of raw lines reports malformed records") {
  const auto jl = parse_json_lines(line(tk::make_record("r1", "ea", SourceType::Sensor, "2024-01-01T00:00:00Z")) +
                                   "{\"record_id\": \"r2\"}\n");
  const auto out = ingest(jl.records);
  CHECK(out.records.size() == 1);
  REQUIRE(has_errors(out.diagnostics));
  CHECK(out.diagnostics[0].location.line == 2);
}

TEST_CASE("routing to criteria") {
  const auto pack = test::small_pack();
  const std::vector<EvidenceRecord> in = {
      tk::make_record("r1", "ea", SourceType::Sensor, "2024-01-01T00:00:00Z"),
      tk::make_record("r2", "eb", SourceType::Manual, "2024-01-01T00:00:00Z"),
      tk::make_record("r3", "ea", SourceType::Document, "2024-01-01T00:00:00Z"),  // not accepted
      tk::make_record("r4", "zz", SourceType::Sensor, "2024-01-01T00:00:00Z"),
  };
  const auto routed = match_to_spec(in, pack);
  REQUIRE(routed.by_criterion.count("a"));
  CHECK(routed.by_criterion.at("a").size() == 1);
  CHECK(routed.by_criterion.at("b").size() == 1);
  CHECK(routed.excluded == 2);
  CHECK(mentions(routed.diagnostics, "DOCUMENT", Severity::Error));
  CHECK(mentions(routed.diagnostics, "zz", Severity::Error));
}

TEST_CASE("an evidence id declared under two criteria is ambiguous") {
  auto pack = test::small_pack();
  pack.paths[0].root.children[1].evidence_specs[0].evidence_id = "ea";
  CHECK(test::error_code_of([&] { match_to_spec({}, pack); }) == ErrorCode::AmbiguousEvidence);
}

TEST_CASE("bundled evidence files ingest cleanly") {
  for (const char* name : {"all_established.jsonl", "road_sign_session.jsonl", "insurance_lapsed.jsonl", "empty.jsonl"}) {
    const auto pack = test::bundled_pack();
    const auto jl = parse_json_lines(tk::read_file(tk::data_dir() / "evidence" / name));
    CHECK(jl.diagnostics.empty());
    const auto out = ingest(jl.records, &pack);
    CHECK_MESSAGE(out.diagnostics.empty(), name);
    const auto routed = match_to_spec(out.records, pack);
    CHECK(routed.excluded == 0);
  }
}
