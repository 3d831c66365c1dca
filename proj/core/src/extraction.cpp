#include "lexpath/extraction.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "lexpath/document.hpp"
#include "lexpath/error.hpp"
#include "lexpath/hash.hpp"
#include "lexpath/pack_json.hpp"

namespace lexpath {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<PromptTemplate>& templates() {
  static const std::vector<PromptTemplate> all = {
      {
          "default-v1",
          R"lp(You convert one statutory provision into a lexpath decision-path document.

Reply with a single document in the lexpath DSL inside one ```lexpath fenced block and nothing else.

Grammar summary:
  PACK <id> { JURISDICTION "<name>" CITATION "<citation>" VERSION "1.0.0" CREATED "<ISO-8601 UTC>" }
  EVIDENCE <id> "<what the observation shows>" { SOURCES <SENSOR|GEOSPATIAL|DOCUMENT|MANUAL>... LIKELIHOOD <count|Cr> <count|not Cr> }
  PATH <id> {
    CONSEQUENCE <id> "<legal effect>" { APPLY <action> "<label>" REJECT <action> "<label>" UNDETERMINED <action> "<label>" }
    <criterion>
  }
  criterion := ALL <id> "<text>" { criterion criterion... }     (every sub-criterion must hold, at least 2)
             | ANY <id> "<text>" { criterion criterion... }     (one sub-criterion suffices, at least 2)
             | NOT <id> "<text>" { criterion }                   (exactly 1)
             | CRITERION <id> "<text>" { PRIOR <p> <1-p> EVIDENCE <evidence id>... }

Rules:
  - One CRITERION per condition the provision states; quote the statute's own words in the criterion text.
  - Conditions joined by "and" or "all of the following" become ALL; "or" / "any of" become ANY; "unless" or "except" become NOT.
  - Every CRITERION has a PRIOR summing to 1 (use 0.5 0.5 when nothing is known) and at least one EVIDENCE reference.
  - Identifiers use letters, digits, '_', '.', ':' and '-'.)lp",
          R"lp((a) A bicycle may be ridden on a sidewalk by a person under 12 years of age or where signs permit it.)lp",
          R"lp(```lexpath
PACK example-bicycle-sidewalk {
  JURISDICTION "Example"
  CITATION "Example Code 1(a)"
  VERSION "1.0.0"
  CREATED "2024-01-01T00:00:00Z"
}

EVIDENCE rider_age_record "rider's registered age is under 12" {
  SOURCES DOCUMENT
  LIKELIHOOD 0.9 0.1
}

EVIDENCE sidewalk_sign "a sign permitting cycling is detected" {
  SOURCES SENSOR
  LIKELIHOOD 0.85 0.15
}

PATH sidewalk_riding {
  CONSEQUENCE may_ride_on_sidewalk "A bicycle may be ridden on a sidewalk" {
    APPLY allow_sidewalk "Allow sidewalk riding"
    REJECT keep_to_road "Keep to the road"
    UNDETERMINED keep_to_road "Keep to the road"
  }
  ANY permitted "by a person under 12 years of age or where signs permit it" {
    CRITERION rider_under_12 "by a person under 12 years of age" {
      PRIOR 0.5 0.5
      EVIDENCE rider_age_record
    }
    CRITERION signs_permit "where signs permit it" {
      PRIOR 0.5 0.5
      EVIDENCE sidewalk_sign
    }
  }
}
```)lp",
      },
  };
  return all;
}

bool blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::optional<std::string> read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

json diagnostic_json(const Diagnostic& d) {
  return json{{"severity", std::string(to_string(d.severity))},
              {"line", d.location.line},
              {"column", d.location.column},
              {"pointer", d.location.pointer},
              {"message", d.message}};
}

// Content of the first ``` fence, or nullopt when there is none.
std::optional<std::pair<std::string_view, bool>> fenced_block(std::string_view raw) {
  const auto open = raw.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  const auto body_start = raw.find('\n', open);
  if (body_start == std::string_view::npos) return std::nullopt;
  const auto close = raw.find("```", body_start + 1);
  const std::string_view body =
      raw.substr(body_start + 1, close == std::string_view::npos ? std::string_view::npos : close - body_start - 1);
  const std::string_view before = raw.substr(0, open);
  const std::string_view after = close == std::string_view::npos ? std::string_view{} : raw.substr(close + 3);
  return std::pair{body, !blank(before) || !blank(after)};
}

// Offset of the first line that starts a document (`PACK`, `#`, or `{`).
std::optional<std::size_t> document_start(std::string_view raw) {
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t first = raw.find_first_not_of(" \t", pos);
    if (first == std::string_view::npos) break;
    const auto rest = raw.substr(first);
    if (rest.starts_with("PACK ") || rest.starts_with("PACK\t") || rest.starts_with("{") || rest.starts_with("#")) {
      return first;
    }
    const auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return std::nullopt;
}

}  // namespace

const PromptTemplate& find_template(std::string_view template_id) {
  for (const auto& t : templates()) {
    if (t.id == template_id) return t;
  }
  throw Error(ErrorCode::UnknownTemplate, "no prompt template '" + std::string(template_id) + "'");
}

std::vector<std::string> template_ids() {
  std::vector<std::string> ids;
  for (const auto& t : templates()) ids.push_back(t.id);
  return ids;
}

std::string build_prompt(std::string_view statute_text, std::string_view template_id) {
  const auto& t = find_template(template_id);
  if (blank(statute_text)) throw Error(ErrorCode::EmptyStatute, "statute text is empty");
  std::string prompt = t.instructions;
  prompt += "\n\nExample provision:\n";
  prompt += t.example_statute;
  prompt += "\n\nExample answer:\n";
  prompt += t.example_output;
  prompt += "\n\nProvision to convert:\n";
  prompt += canonical_statute_text(statute_text);
  if (prompt.back() != '\n') prompt += '\n';
  return prompt;
}

std::string canonical_statute_text(std::string_view statute_text) {
  std::string out;
  out.reserve(statute_text.size());
  for (std::size_t i = 0; i < statute_text.size(); ++i) {
    if (statute_text[i] == '\r') {
      out += '\n';
      if (i + 1 < statute_text.size() && statute_text[i + 1] == '\n') ++i;
    } else {
      out += statute_text[i];
    }
  }
  return out;
}

std::string fixture_key(std::string_view template_id, std::string_view statute_text) {
  const json request{{"statute_text", canonical_statute_text(statute_text)}, {"template_id", template_id}};
  return sha256_hex(request.dump());
}

FixtureStore::FixtureStore(fs::path root) : root_(std::move(root)) {}

std::optional<Fixture> FixtureStore::find(std::string_view key) const {
  if (!is_sha256_hex(key)) return std::nullopt;
  const auto text = read_file(root_ / (std::string(key) + ".json"));
  if (!text) return std::nullopt;
  try {
    const json j = json::parse(*text);
    Fixture f{j.at("request_hash").get<std::string>(), j.at("template_id").get<std::string>(),
              j.at("statute_sha256").get<std::string>(), j.at("response").get<std::string>()};
    if (f.request_hash != key) {
      throw Error(ErrorCode::ValidationFailed, "fixture " + std::string(key) + " records a different request hash");
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ValidationFailed, "fixture " + std::string(key) + " is unreadable: " + e.what());
  }
}

fs::path FixtureStore::record(const Fixture& fixture) {
  if (!is_sha256_hex(fixture.request_hash)) throw Error(ErrorCode::InvalidArgument, "fixture key is not a SHA-256 digest");
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create fixture store " + root_.string());

  const fs::path lock_file = root_ / ".lock";
  const int fd = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0 || ::flock(fd, LOCK_EX) != 0) {
    if (fd >= 0) ::close(fd);
    throw Error(ErrorCode::Io, "cannot lock fixture store " + root_.string());
  }
  const fs::path target = root_ / (fixture.request_hash + ".json");
  const fs::path tmp = root_ / (".tmp-" + fixture.request_hash);
  const json j{{"request_hash", fixture.request_hash},
               {"template_id", fixture.template_id},
               {"statute_sha256", fixture.statute_sha256},
               {"response", fixture.response}};
  bool ok = false;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    ok = static_cast<bool>(out.flush());
  }
  if (ok) fs::rename(tmp, target, ec);
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (!ok || ec) throw Error(ErrorCode::Io, "cannot write fixture " + target.string());
  return target;
}

std::string submit(const ExtractionJob& job, ModelEndpoint* endpoint) {
  find_template(job.prompt_template_id);
  if (blank(job.statute_text)) throw Error(ErrorCode::EmptyStatute, "statute text is empty");
  const std::string key = fixture_key(job.prompt_template_id, job.statute_text);

  if (job.mode == ExtractionMode::Replay) {
    if (!job.fixture_store) throw Error(ErrorCode::InvalidArgument, "REPLAY mode needs a fixture store");
    auto fixture = FixtureStore(*job.fixture_store).find(key);
    if (!fixture) {
      throw Error(ErrorCode::FixtureMiss, "no recorded response for request " + key + " in " + job.fixture_store->string());
    }
    return fixture->response;
  }

  const std::string prompt = build_prompt(job.statute_text, job.prompt_template_id);
  std::string response;
  if (endpoint) {
    response = endpoint->complete(prompt);
  } else {
    HttpModelEndpoint http(job.model_endpoint);
    response = http.complete(prompt);
  }
  if (job.fixture_store) {
    FixtureStore(*job.fixture_store)
        .record({key, job.prompt_template_id, sha256_hex(canonical_statute_text(job.statute_text)), response});
  }
  return response;
}

std::string_view to_string(ReviewStatus status) noexcept {
  switch (status) {
    case ReviewStatus::Draft: return "DRAFT";
    case ReviewStatus::Verified: return "VERIFIED";
    case ReviewStatus::Rejected: return "REJECTED";
  }
  return "DRAFT";
}

std::optional<ReviewStatus> parse_review_status(std::string_view text) noexcept {
  if (text == "DRAFT") return ReviewStatus::Draft;
  if (text == "VERIFIED") return ReviewStatus::Verified;
  if (text == "REJECTED") return ReviewStatus::Rejected;
  return std::nullopt;
}

ExtractionResult parse_model_output(std::string_view raw) {
  ExtractionResult result;
  result.raw_output = std::string(raw);

  std::string_view document = raw;
  bool stripped = false;
  if (auto block = fenced_block(raw)) {
    document = block->first;
    stripped = block->second;
  } else if (auto start = document_start(raw)) {
    stripped = !blank(raw.substr(0, *start));
    document = raw.substr(*start);
  } else {
    result.diagnostics.push_back(make_error("model output contains no decision-path document"));
    return result;
  }
  if (stripped) result.diagnostics.push_back(make_warning("stripped surrounding prose from model output"));

  auto parsed = parse_document(PathDocument{std::string(document), std::nullopt});
  result.diagnostics.insert(result.diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  result.draft_pack = std::move(parsed.pack);
  return result;
}

void record_review(ExtractionResult& result, ReviewAction action) {
  if (action.reviewer.empty()) throw Error(ErrorCode::InvalidArgument, "a review needs a named reviewer");
  if (action.verdict == ReviewStatus::Draft) throw Error(ErrorCode::InvalidArgument, "a review verdict is VERIFIED or REJECTED");
  if (action.verdict == ReviewStatus::Verified && !result.draft_pack) {
    throw Error(ErrorCode::ValidationFailed, "cannot verify an extraction that produced no pack");
  }
  result.review_status = action.verdict;
  result.review = std::move(action);
}

StoredVersion promote(PackStore& store, const ExtractionResult& result) {
  if (result.review_status != ReviewStatus::Verified || !result.review || !result.draft_pack) {
    throw Error(ErrorCode::ValidationFailed, "only a reviewer-VERIFIED draft may enter the pack store (status " +
                                                 std::string(to_string(result.review_status)) + ")");
  }
  return store.store(*result.draft_pack);
}

json to_json(const ExtractionResult& result) {
  json diagnostics = json::array();
  for (const auto& d : result.diagnostics) diagnostics.push_back(diagnostic_json(d));
  json review = nullptr;
  if (result.review) {
    review = json{{"reviewer", result.review->reviewer},
                  {"verdict", std::string(to_string(result.review->verdict))},
                  {"note", result.review->note},
                  {"at", format_timestamp(result.review->at)}};
  }
  return json{{"format", "lexpath.extraction/1"},
              {"review_status", std::string(to_string(result.review_status))},
              {"review", review},
              {"pack", result.draft_pack ? to_json(*result.draft_pack) : json(nullptr)},
              {"diagnostics", diagnostics},
              {"raw_output", result.raw_output}};
}

std::optional<ExtractionResult> extraction_result_from_json(const json& value, std::vector<Diagnostic>& diagnostics) {
  const auto fail = [&](const std::string& message, const std::string& pointer) {
    diagnostics.push_back(make_error(message, Location{0, 0, pointer}));
    return std::nullopt;
  };
  if (!value.is_object() || value.value("format", "") != "lexpath.extraction/1") {
    return fail("not an extraction result (format lexpath.extraction/1)", "/format");
  }
  ExtractionResult result;
  auto status = value.contains("review_status") && value["review_status"].is_string()
                    ? parse_review_status(value["review_status"].get<std::string>())
                    : std::nullopt;
  if (!status) return fail("review_status must be DRAFT, VERIFIED or REJECTED", "/review_status");
  result.review_status = *status;
  if (value.contains("raw_output") && value["raw_output"].is_string()) result.raw_output = value["raw_output"];

  if (value.contains("review") && value["review"].is_object()) {
    const auto& r = value["review"];
    ReviewAction action;
    action.reviewer = r.value("reviewer", "");
    action.note = r.value("note", "");
    auto verdict = parse_review_status(r.value("verdict", ""));
    auto at = parse_timestamp(r.value("at", ""));
    if (!verdict || !at || action.reviewer.empty()) return fail("review record is incomplete", "/review");
    action.verdict = *verdict;
    action.at = *at;
    result.review = std::move(action);
  }
  if (result.review_status != ReviewStatus::Draft &&
      (!result.review || result.review->verdict != result.review_status)) {
    return fail("review_status " + std::string(to_string(result.review_status)) + " has no matching review record",
                "/review_status");
  }

  if (value.contains("pack") && !value["pack"].is_null()) {
    std::vector<Diagnostic> pack_diags;
    auto pack = pack_from_json(value["pack"], pack_diags);
    if (pack) {
      auto v = validate_pack(*pack);
      pack_diags.insert(pack_diags.end(), v.begin(), v.end());
    }
    for (auto& d : pack_diags) d.location.pointer = "/pack" + d.location.pointer;
    const bool bad = has_errors(pack_diags);
    diagnostics.insert(diagnostics.end(), pack_diags.begin(), pack_diags.end());
    if (bad) return std::nullopt;
    result.draft_pack = std::move(pack);
  }
  if (value.contains("diagnostics") && value["diagnostics"].is_array()) {
    for (const auto& d : value["diagnostics"]) {
      if (!d.is_object()) continue;
      Diagnostic diag;
      diag.severity = d.value("severity", "error") == "warning" ? Severity::Warning : Severity::Error;
      diag.location = Location{d.value("line", std::size_t{0}), d.value("column", std::size_t{0}), d.value("pointer", "")};
      diag.message = d.value("message", "");
      result.diagnostics.push_back(std::move(diag));
    }
  }
  return result;
}

}  // namespace lexpath
