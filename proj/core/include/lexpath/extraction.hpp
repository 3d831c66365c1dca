#pragma once

// Extract/Transform stage: prompt construction, the model endpoint
// abstraction, record/replay fixtures, and parsing of model output into a
// draft pack awaiting human review.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexpath/diagnostic.hpp"
#include "lexpath/pack_store.hpp"
#include "lexpath/rule_ir.hpp"
#include "lexpath/timestamp.hpp"

namespace lexpath {

struct PromptTemplate {
  std::string id;
  std::string instructions;
  std::string example_statute;
  std::string example_output;
};

/// Throws UnknownTemplate.
const PromptTemplate& find_template(std::string_view template_id);
std::vector<std::string> template_ids();

/// Output-format instructions, one worked example, then the statute text
/// verbatim. Throws EmptyStatute for blank text and UnknownTemplate.
std::string build_prompt(std::string_view statute_text, std::string_view template_id);

/// Single text in, single text out.
class ModelEndpoint {
 public:
  virtual ~ModelEndpoint() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

struct EndpointDescriptor {
  std::string url;
  /// Environment variable holding the bearer token; unset or empty means no
  /// Authorization header.
  std::string token_env = "LEXPATH_MODEL_TOKEN";
  std::chrono::milliseconds timeout{60'000};
};

/// POSTs `{"prompt": ...}` to the descriptor's URL and reads `{"text": ...}`.
/// Throws EndpointUnavailable or Timeout.
class HttpModelEndpoint : public ModelEndpoint {
 public:
  explicit HttpModelEndpoint(EndpointDescriptor descriptor);
  std::string complete(std::string_view prompt) override;

 private:
  EndpointDescriptor descriptor_;
};

struct Fixture {
  std::string request_hash;
  std::string template_id;
  std::string statute_sha256;
  std::string response;

  bool operator==(const Fixture&) const = default;
};

/// Line endings normalised to LF; the fixture key and statute digest are
/// computed over this form.
std::string canonical_statute_text(std::string_view statute_text);

/// SHA-256 over the canonical JSON of {statute_text, template_id}.
std::string fixture_key(std::string_view template_id, std::string_view statute_text);

/// Directory of `<key>.json` fixtures. Appends take an exclusive lock.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path root);

  std::optional<Fixture> find(std::string_view key) const;
  std::filesystem::path record(const Fixture& fixture);
  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

enum class ExtractionMode { Live, Replay };

struct ExtractionJob {
  std::string statute_text;
  std::string statute_citation;
  std::string prompt_template_id = "default-v1";
  EndpointDescriptor model_endpoint;
  ExtractionMode mode = ExtractionMode::Replay;
  std::optional<std::filesystem::path> fixture_store;
};

/// REPLAY returns the recorded response byte for byte (FixtureMiss if none).
/// LIVE calls the endpoint and records the exchange when a fixture store is
/// configured. `endpoint` overrides the HTTP client built from the job.
std::string submit(const ExtractionJob& job, ModelEndpoint* endpoint = nullptr);

enum class ReviewStatus { Draft, Verified, Rejected };

std::string_view to_string(ReviewStatus status) noexcept;
std::optional<ReviewStatus> parse_review_status(std::string_view text) noexcept;

struct ReviewAction {
  std::string reviewer;
  ReviewStatus verdict = ReviewStatus::Draft;
  std::string note;
  Timestamp at{};

  bool operator==(const ReviewAction&) const = default;
};

struct ExtractionResult {
  std::string raw_output;
  std::optional<JurisdictionPack> draft_pack;
  std::vector<Diagnostic> diagnostics;
  ReviewStatus review_status = ReviewStatus::Draft;
  std::optional<ReviewAction> review;
};

/// Pulls the document out of a fenced block (or skips leading prose) and
/// parses it. Model output that does not parse yields no pack.
ExtractionResult parse_model_output(std::string_view raw);

/// The only way to leave DRAFT: a named reviewer's VERIFIED or REJECTED verdict.
void record_review(ExtractionResult& result, ReviewAction action);

/// Stores a VERIFIED draft. Throws ValidationFailed for anything else.
StoredVersion promote(PackStore& store, const ExtractionResult& result);

nlohmann::json to_json(const ExtractionResult& result);
std::optional<ExtractionResult> extraction_result_from_json(const nlohmann::json& value,
                                                            std::vector<Diagnostic>& diagnostics);

}  // namespace lexpath
