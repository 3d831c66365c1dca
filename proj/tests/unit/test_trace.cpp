#include <doctest.h>

#include <charconv>

#include "helpers.hpp"
#include "lexpath/hash.hpp"
#include "lexpath/trace.hpp"

using namespace lexpath;
namespace tk = lexpath::testkit;

namespace {

TraceHeader header() { return {"0123456789abcdef", "pack", "1.0.0", "path", "argmax"}; }

TraceEvent event(EventKind kind, std::map<std::string, std::string> subjects = {},
                 std::map<std::string, std::string> values = {}) {
  TraceEvent e;
  e.kind = kind;
  e.subjects = std::move(subjects);
  e.values = std::move(values);
  e.timestamp = *parse_timestamp("2024-05-01T08:00:00Z");
  return e;
}

Trace three_events() {
  Trace t(header());
  t.append(event(EventKind::SessionStart, {{"pack_id", "pack"}}));
  t.append(event(EventKind::PriorLoaded, {{"criterion_id", "c"}}, {{"p_cr", format_probability(0.3)}}));
  t.append(event(EventKind::Decision, {{"action_id", "go"}}));
  return t;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    out.push_back(text.substr(start, nl - start));
    start = nl == std::string::npos ? text.size() : nl + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& ls) {
  std::string out;
  for (const auto& l : ls) out += l + "\n";
  return out;
}

std::size_t broken_at(const std::function<void()>& f) {
  try {
    f();
  } catch (const ChainBrokenError& e) {
    return e.index();
  }
  FAIL("expected ChainBrokenError");
  return 0;
}

}  // namespace

TEST_CASE("hash chain definition") {
  const auto t = three_events();
  std::string previous = genesis_hash(header());
  for (const auto& e : t.events()) {
    CHECK(e.hash == sha256_hex(previous + canonical_event_bytes(e)));
    CHECK(e.hash == chain_hash(previous, e));
    previous = e.hash;
  }
  CHECK(t.head_hash() == previous);
  CHECK(Trace(header()).head_hash() == genesis_hash(header()));
  CHECK(t.verifies());
}

TEST_CASE("genesis depends on every header field") {
  const auto base = genesis_hash(header());
  for (int i = 0; i < 5; ++i) {
    auto h = header();
    std::string* fields[] = {&h.trace_id, &h.pack_id, &h.version, &h.path_id, &h.policy};
    *fields[i] += "x";
    CHECK(genesis_hash(h) != base);
  }
}

TEST_CASE("canonical event bytes are sorted compact JSON without the hash") {
  auto e = event(EventKind::Posterior, {{"z", "1"}, {"a", "2"}}, {{"p_cr", "0.5"}});
  e.hash = "ignored";
  const auto bytes = canonical_event_bytes(e);
  CHECK(bytes.find("ignored") == std::string::npos);
  CHECK(bytes.find(' ') == std::string::npos);
  CHECK(bytes.find("\"a\":\"2\"") < bytes.find("\"z\":\"1\""));
  CHECK(bytes.find("POSTERIOR") != std::string::npos);
}

TEST_CASE("tampering is detected at the first altered event") {
  const auto t = three_events();
  auto events = std::vector<TraceEvent>(t.events().begin(), t.events().end());
  SUBCASE("content") {
    events[1].values["p_cr"] = "0.9";
    const auto bad = Trace::assemble(header(), events, t.head_hash());
    CHECK(broken_at([&] { bad.verify(); }) == 1);
    CHECK_FALSE(bad.verifies());
  }
  SUBCASE("reordering") {
    std::swap(events[0], events[1]);
    CHECK(broken_at([&] { Trace::assemble(header(), events, t.head_hash()).verify(); }) == 0);
  }
  SUBCASE("truncation keeps a consistent prefix but not the recorded head") {
    events.pop_back();
    CHECK(broken_at([&] { Trace::assemble(header(), events, t.head_hash()).verify(); }) == 2);
  }
  SUBCASE("header") {
    auto h = header();
    h.policy = "certainty";
    CHECK(broken_at([&] { Trace::assemble(h, events, t.head_hash()).verify(); }) == 0);
  }
}

TEST_CASE("append refuses a trace whose head was forged") {
  const auto t = three_events();
  auto forged = Trace::assemble(header(), std::vector<TraceEvent>(t.events().begin(), t.events().end()), "00");
  CHECK_THROWS_AS(forged.append(event(EventKind::Error)), ChainBrokenError);
  const auto longer = append(t, event(EventKind::Error));
  CHECK(longer.size() == 4);
  CHECK(t.size() == 3);
}

TEST_CASE("JSONL export/import") {
  const auto t = three_events();
  const auto text = export_trace(t, ExportFormat::Jsonl);
  const auto ls = lines(text);
  REQUIRE(ls.size() == 4);
  const auto head = nlohmann::json::parse(ls[0]);
  CHECK(head["head_hash"] == t.head_hash());
  CHECK(head["event_count"] == 3);
  CHECK(head["trace_id"] == "0123456789abcdef");
  const auto back = import_trace(text);
  CHECK(back == t);

  SUBCASE("altered value") {
    auto ls2 = ls;
    ls2[2].replace(ls2[2].find("0.29999999999999999"), 19, "0.39999999999999999");
    CHECK(broken_at([&] { import_trace(join(ls2)); }) == 1);
  }
  SUBCASE("garbage line") {
    auto ls2 = ls;
    ls2[3] = "{not json";
    CHECK(broken_at([&] { import_trace(join(ls2)); }) == 2);
  }
  SUBCASE("non-canonical encoding") {
    auto ls2 = ls;
    ls2[1].insert(1, " ");
    CHECK(broken_at([&] { import_trace(join(ls2)); }) == 0);
  }
  SUBCASE("missing event") {
    auto ls2 = ls;
    ls2.pop_back();
    CHECK(broken_at([&] { import_trace(join(ls2)); }) == 2);
  }
  SUBCASE("bad header") {
    auto ls2 = ls;
    ls2[0] = "[]";
    CHECK(broken_at([&] { import_trace(join(ls2)); }) == 0);
    CHECK(broken_at([] { import_trace(""); }) == 0);
  }
}

TEST_CASE("text export is the auditor rendering") {
  const auto t = three_events();
  CHECK(export_trace(t, ExportFormat::Text) == render_explanation(t, Audience::Auditor));
  CHECK(export_trace(t, ExportFormat::Text).find("chain verified") != std::string::npos);
}

TEST_CASE("property: export/import preserves the head hash") {
  tk::Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    const auto t = tk::random_trace(rng, static_cast<std::size_t>(rng() % 15));
    const auto back = import_trace(export_trace(t, ExportFormat::Jsonl));
    CHECK(back.head_hash() == t.head_hash());
    CHECK(back == t);
  }
}

TEST_CASE("probabilities are written losslessly") {
  tk::Rng rng(32);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    const auto s = format_probability(v);
    double back = -1;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_probability(0.5) == "0.5");
  CHECK_THROWS_AS(format_probability(std::nan("")), Error);
}

TEST_CASE("event kinds and audiences") {
  for (int k = 0; k <= static_cast<int>(EventKind::Error); ++k) {
    const auto kind = static_cast<EventKind>(k);
    CHECK(parse_event_kind(to_string(kind)) == kind);
  }
  CHECK(parse_audience("operator") == Audience::Operator);
  CHECK(parse_audience("AUDITOR") == Audience::Auditor);
  CHECK_FALSE(parse_audience("judge"));
}
