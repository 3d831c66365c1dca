#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lexpath/document.hpp"
#include "lexpath/evidence.hpp"
#include "lexpath/extraction.hpp"
#include "lexpath/inference.hpp"
#include "lexpath/pack_json.hpp"
#include "lexpath/pack_store.hpp"
#include "lexpath/review.hpp"
#include "lexpath/session.hpp"
#include "lexpath/trace.hpp"

namespace lexpath::cli {

namespace fs = std::filesystem;
using nlohmann::json;

ExitCode exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return ExitCode::Unreadable;
    case ErrorCode::FixtureMiss: return ExitCode::FixtureMiss;
    case ErrorCode::EndpointUnavailable:
    case ErrorCode::Timeout: return ExitCode::EndpointUnavailable;
    case ErrorCode::ChainBroken: return ExitCode::ChainBroken;
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotFound:
    case ErrorCode::ValidationFailed:
    case ErrorCode::DuplicateVersion:
    case ErrorCode::UnknownTemplate:
    case ErrorCode::EmptyStatute:
    case ErrorCode::DegenerateUpdate:
    case ErrorCode::UnknownEvidence:
    case ErrorCode::MissingLeafStatus:
    case ErrorCode::AmbiguousEvidence: return ExitCode::Failure;
  }
  return ExitCode::Failure;
}

std::string_view describe(ExitCode code) noexcept {
  switch (code) {
    case ExitCode::Ok: return "success; for infer, the apply action was selected";
    case ExitCode::Failure: return "invalid input, validation or inference error";
    case ExitCode::Unreadable: return "an input file could not be read";
    case ExitCode::FixtureMiss: return "no recorded model response for a replayed extraction";
    case ExitCode::EndpointUnavailable: return "model endpoint unreachable, failed or timed out";
    case ExitCode::ChainBroken: return "trace hash chain does not verify";
    case ExitCode::Reject: return "infer selected the reject action";
    case ExitCode::Undetermined: return "infer selected the undetermined action";
  }
  return "";
}

namespace {

constexpr const char* kSchema = "lexpath.cli/1";

std::optional<std::string> read_text(const fs::path& file) {
  std::error_code ec;
  if (fs::is_directory(file, ec)) return std::nullopt;
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return std::move(buf).str();
}

void write_text(const fs::path& file, std::string_view text) {
  std::error_code ec;
  if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + file.string());
}

json diagnostic_json(const Diagnostic& d, const std::string& file) {
  json j{{"severity", std::string(to_string(d.severity))}, {"message", d.message}};
  if (!file.empty()) j["file"] = file;
  if (d.location.has_position()) {
    j["line"] = d.location.line;
    j["column"] = d.location.column;
  }
  if (!d.location.pointer.empty()) j["pointer"] = d.location.pointer;
  return j;
}

std::string fixed4(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
  return std::string(buf, end);
}

std::string fixed4(const std::string* decimal) {
  if (!decimal) return "?";
  double v = 0;
  auto [end, ec] = std::from_chars(decimal->data(), decimal->data() + decimal->size(), v);
  return ec == std::errc{} ? fixed4(v) : *decimal;
}

// Shared state for one invocation.
class Context {
 public:
  Context(Config config, std::ostream& out, std::ostream& err) : config(std::move(config)), out(out), err(err) {}

  bool json_mode() const { return config.output_format == OutputFormat::Json; }

  void diagnostic(const Diagnostic& d, const std::string& file, std::ostream& stream) {
    diagnostics.push_back(diagnostic_json(d, file));
    if (!json_mode()) stream << format_diagnostic(d, file) << "\n";
  }
  void diagnostics_to_err(std::span<const Diagnostic> ds, const std::string& file) {
    for (const auto& d : ds) diagnostic(d, file, err);
  }

  ExitCode fail(ExitCode code, const std::string& message, std::optional<ErrorCode> error = std::nullopt) {
    body["error"] = json{{"message", message}};
    if (error) body["error"]["code"] = std::string(to_string(*error));
    if (!json_mode()) err << "lexpath: " << message << "\n";
    return code;
  }
  ExitCode fail(const Error& e) { return fail(exit_code_for(e.code()), e.what(), e.code()); }

  void verbose(const std::string& message) {
    if (config.verbosity > 0 && !json_mode()) err << message << "\n";
  }

  Config config;
  std::ostream& out;
  std::ostream& err;
  json body = json::object();
  json diagnostics = json::array();
};

struct LoadedDocument {
  std::optional<JurisdictionPack> pack;
  std::vector<Diagnostic> diagnostics;
  bool readable = true;
};

LoadedDocument load_document(const std::string& file) {
  LoadedDocument doc;
  auto text = read_text(file);
  if (!text) {
    doc.readable = false;
    return doc;
  }
  auto parsed = parse_document(PathDocument{std::move(*text), format_for_extension(file)});
  doc.pack = std::move(parsed.pack);
  doc.diagnostics = std::move(parsed.diagnostics);
  return doc;
}

std::optional<DecisionPolicy> resolve_policy(Context& ctx, const std::string& flag) {
  const std::string text = flag.empty() ? ctx.config.default_policy : flag;
  auto policy = DecisionPolicy::parse(text);
  if (!policy) {
    ctx.fail(ExitCode::Failure, "unknown policy '" + text + "' (argmax, threshold[:tau], certainty[:eps])");
  }
  return policy;
}

const DecisionPath* resolve_path(Context& ctx, const JurisdictionPack& pack, const std::string& path_id) {
  if (path_id.empty()) {
    if (pack.paths.size() == 1) return &pack.paths.front();
    ctx.fail(ExitCode::Failure, "pack '" + pack.pack_id + "' has " + std::to_string(pack.paths.size()) +
                                    " paths; choose one with --path");
    return nullptr;
  }
  const auto* path = pack.find_path(path_id);
  if (!path) ctx.fail(ExitCode::Failure, "pack '" + pack.pack_id + "' has no path '" + path_id + "'");
  return path;
}

std::optional<Timestamp> resolve_at(Context& ctx, const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto ts = parse_timestamp(text);
  if (!ts) ctx.fail(ExitCode::Failure, "--at '" + text + "' is not an ISO-8601 timestamp");
  return ts;
}

ExitCode exit_for(Status status) {
  switch (status) {
    case Status::Established: return ExitCode::Ok;
    case Status::Rejected: return ExitCode::Reject;
    case Status::Undetermined: return ExitCode::Undetermined;
  }
  return ExitCode::Failure;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string file;
};

ExitCode cmd_validate(Context& ctx, const ValidateArgs& a) {
  auto doc = load_document(a.file);
  ctx.body["file"] = a.file;
  if (!doc.readable) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.file);
  for (const auto& d : doc.diagnostics) ctx.diagnostic(d, a.file, ctx.out);
  const bool ok = doc.pack.has_value();
  ctx.body["ok"] = ok;
  if (ok) {
    ctx.body["pack_id"] = doc.pack->pack_id;
    ctx.body["version"] = doc.pack->version;
    ctx.body["paths"] = doc.pack->paths.size();
    if (!ctx.json_mode()) {
      ctx.out << a.file << ": ok, pack " << doc.pack->pack_id << "@" << doc.pack->version << ", "
              << doc.pack->paths.size() << " path(s)\n";
    }
    return ExitCode::Ok;
  }
  if (!ctx.json_mode()) ctx.out << a.file << ": " << count_errors(doc.diagnostics) << " error(s)\n";
  return ExitCode::Failure;
}

// ------------------------------------------------------------------- store

struct StoreArgs {
  std::string file;
};

ExitCode cmd_store(Context& ctx, const StoreArgs& a) {
  auto text = read_text(a.file);
  if (!text) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.file);
  if (detect_format(*text) == DocumentFormat::Json) {
    const json j = json::parse(*text, nullptr, false);
    if (j.is_object() && j.contains("review_status")) {
      return ctx.fail(ExitCode::Failure,
                      a.file + " is an extraction draft; drafts enter the store only through 'lexpath review'");
    }
  }
  auto doc = load_document(a.file);
  ctx.diagnostics_to_err(doc.diagnostics, a.file);
  if (!doc.pack) return ctx.fail(ExitCode::Failure, a.file + " does not validate");
  PackStore store(ctx.config.pack_store_path);
  const auto stored = store.store(*doc.pack);
  ctx.body["pack_id"] = stored.pack_id;
  ctx.body["version"] = stored.version;
  ctx.body["file"] = stored.file.string();
  ctx.body["sha256"] = stored.sha256;
  ctx.body["created"] = stored.created;
  if (!ctx.json_mode()) {
    ctx.out << (stored.created ? "stored " : "already stored ") << stored.pack_id << "@" << stored.version << " -> "
            << stored.file.string() << "\n";
  }
  return ExitCode::Ok;
}

// ----------------------------------------------------------------- extract

struct ExtractArgs {
  std::string statute;
  std::string template_id = "default-v1";
  bool live = false;
  bool replay = false;
  std::string out;
  std::string reference;
  std::string endpoint;
  std::string token_env = "LEXPATH_MODEL_TOKEN";
  std::string timeout = "60s";
  std::string citation;
};

ExitCode cmd_extract(Context& ctx, const ExtractArgs& a) {
  auto statute = read_text(a.statute);
  if (!statute) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.statute);

  ExtractionJob job;
  job.statute_text = *statute;
  job.statute_citation = a.citation;
  job.prompt_template_id = a.template_id;
  job.mode = a.live ? ExtractionMode::Live : ExtractionMode::Replay;
  job.fixture_store = fs::path(ctx.config.fixture_store_path);
  job.model_endpoint.url = a.endpoint;
  job.model_endpoint.token_env = a.token_env;
  if (auto timeout = parse_duration(a.timeout)) {
    job.model_endpoint.timeout = *timeout;
  } else {
    return ctx.fail(ExitCode::Failure, "--timeout '" + a.timeout + "' is not a duration");
  }
  if (a.live && a.endpoint.empty()) return ctx.fail(ExitCode::Failure, "--live needs --endpoint");
  ctx.verbose("fixture store: " + ctx.config.fixture_store_path);
  ctx.verbose("request key: " + fixture_key(job.prompt_template_id, job.statute_text));

  const std::string raw = submit(job);
  auto result = parse_model_output(raw);
  if (result.draft_pack && !a.citation.empty()) result.draft_pack->source_citation = a.citation;
  ctx.diagnostics_to_err(result.diagnostics, a.out.empty() ? std::string("<model output>") : a.out);

  const json draft = to_json(result);
  if (!a.out.empty()) {
    write_text(a.out, draft.dump(2) + "\n");
    ctx.body["out"] = a.out;
    if (!ctx.json_mode()) {
      ctx.out << "draft " << (result.draft_pack ? "pack" : "(no pack)") << " written to " << a.out
              << " with review_status " << to_string(result.review_status) << "\n";
    }
  } else if (ctx.json_mode()) {
    ctx.body["draft"] = draft;
  } else {
    ctx.out << draft.dump(2) << "\n";
  }
  ctx.body["review_status"] = std::string(to_string(result.review_status));
  ctx.body["parsed"] = result.draft_pack.has_value();

  if (!a.reference.empty()) {
    auto ref = load_document(a.reference);
    if (!ref.readable) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.reference);
    if (!ref.pack) {
      ctx.diagnostics_to_err(ref.diagnostics, a.reference);
      return ctx.fail(ExitCode::Failure, "reference pack " + a.reference + " does not validate");
    }
    if (result.draft_pack) {
      const auto report = review_report(*result.draft_pack, *ref.pack);
      json edits = json::array();
      for (const auto& e : report.edits) {
        edits.push_back({{"kind", std::string(to_string(e.kind))},
                         {"path_id", e.path_id},
                         {"subject", e.subject},
                         {"detail", e.detail},
                         {"semantics_inverting", e.semantics_inverting}});
      }
      ctx.body["review"] = {{"verdict", std::string(to_string(report.verdict))},
                            {"edit_count", report.edit_count()},
                            {"edits", edits},
                            {"notes", report.notes}};
      if (!ctx.json_mode()) ctx.out << format_review(report);
    }
  }
  if (!result.draft_pack) return ctx.fail(ExitCode::Failure, "model output did not yield a valid pack");
  return ExitCode::Ok;
}

// ------------------------------------------------------------------- infer

struct InferArgs {
  std::string pack;
  std::string version = "latest";
  std::string path;
  std::string evidence;
  std::string policy;
  std::string trace_out;
  std::string at;
};

std::optional<std::vector<EvidenceRecord>> read_evidence(Context& ctx, const std::string& file, ExitCode& code) {
  if (file.empty()) return std::vector<EvidenceRecord>{};
  auto text = read_text(file);
  if (!text) {
    code = ctx.fail(ExitCode::Unreadable, "cannot read " + file);
    return std::nullopt;
  }
  auto lines = parse_json_lines(*text);
  auto ingested = ingest(lines.records);
  ctx.diagnostics_to_err(lines.diagnostics, file);
  ctx.diagnostics_to_err(ingested.diagnostics, file);
  if (has_errors(lines.diagnostics) || has_errors(ingested.diagnostics)) {
    code = ctx.fail(ExitCode::Failure, "evidence file " + file + " has errors");
    return std::nullopt;
  }
  return std::move(ingested.records);
}

void write_trace(Context& ctx, const Trace& trace, const std::string& file) {
  ctx.body["trace"] = {{"trace_id", trace.header().trace_id},
                       {"head_hash", trace.head_hash()},
                       {"events", trace.size()}};
  if (file.empty()) return;
  write_text(file, export_trace(trace, ExportFormat::Jsonl));
  ctx.body["trace"]["file"] = file;
}

ExitCode cmd_infer(Context& ctx, const InferArgs& a) {
  auto policy = resolve_policy(ctx, a.policy);
  if (!policy) return ExitCode::Failure;
  std::optional<Timestamp> at;
  if (!a.at.empty() && !(at = resolve_at(ctx, a.at))) return ExitCode::Failure;

  PackStore store(ctx.config.pack_store_path);
  const auto pack = store.load(a.pack, a.version);
  const auto* path = resolve_path(ctx, pack, a.path);
  if (!path) return ExitCode::Failure;

  ExitCode code = ExitCode::Ok;
  auto evidence = read_evidence(ctx, a.evidence, code);
  if (!evidence) return code;

  ctx.body["pack_id"] = pack.pack_id;
  ctx.body["version"] = pack.version;
  ctx.body["path_id"] = path->path_id;
  ctx.body["policy"] = policy->to_string();

  std::optional<SessionResult> session;
  try {
    session = run_session(pack, path->path_id, *evidence, *policy, SessionOptions{at});
  } catch (const SessionError& e) {
    write_trace(ctx, e.trace(), a.trace_out);
    if (!ctx.json_mode()) {
      ctx.err << "trace " << e.trace().header().trace_id << ": " << e.trace().size() << " events, last is "
              << to_string(e.trace().events().back().kind)
              << (a.trace_out.empty() ? std::string() : ", written to " + a.trace_out) << "\n";
    }
    return ctx.fail(e);
  }
  const SessionResult& result = *session;
  ctx.diagnostics_to_err(result.diagnostics, a.evidence);

  const auto& d = result.decision;
  json criteria = json::array();
  std::ostringstream lines;
  for (const auto& e : result.trace.events()) {
    if (e.kind == EventKind::LeafStatus) {
      criteria.push_back({{"criterion_id", *e.subject("criterion_id")},
                          {"kind", "LEAF"},
                          {"status", *e.subject("status")},
                          {"p_cr", *e.value("p_cr")},
                          {"updates", std::stoull(*e.value("update_count"))}});
      lines << "  " << *e.subject("criterion_id") << "  " << *e.subject("status") << "  P(Cr)="
            << fixed4(e.value("p_cr")) << "  updates=" << *e.value("update_count") << "\n";
    } else if (e.kind == EventKind::TreeStatus) {
      criteria.push_back({{"criterion_id", *e.subject("criterion_id")},
                          {"kind", *e.subject("kind")},
                          {"status", *e.subject("status")}});
      lines << "  " << *e.subject("criterion_id") << "  " << *e.subject("status") << "  (" << *e.subject("kind")
            << " of " << *e.subject("children") << ")\n";
    }
  }
  ctx.body["action"] = d.action.action_id;
  ctx.body["action_label"] = d.action.label;
  ctx.body["status"] = std::string(to_string(d.root_status.status));
  ctx.body["consequence_id"] = d.consequence_id;
  ctx.body["criteria"] = criteria;
  write_trace(ctx, result.trace, a.trace_out);

  if (!ctx.json_mode()) {
    ctx.out << "action: " << d.action.action_id;
    if (!d.action.label.empty()) ctx.out << " (" << d.action.label << ")";
    ctx.out << "\nconsequence " << d.consequence_id << ": " << to_string(d.root_status.status) << " under "
            << policy->to_string() << "\n";
    ctx.out << "criteria:\n" << lines.str();
    ctx.out << "trace " << result.trace.header().trace_id << ": " << result.trace.size() << " events, head "
            << result.trace.head_hash();
    if (!a.trace_out.empty()) ctx.out << ", written to " << a.trace_out;
    ctx.out << "\n";
  }
  return exit_for(d.root_status.status);
}

// ------------------------------------------------------------------- learn

struct LearnArgs {
  std::string pack;
  std::string version = "latest";
  std::string criterion;
  std::string evidence_id;
  std::string observed;
  double weight = 1.0;
  std::string bump = "patch";
  std::string at;
};

ExitCode cmd_learn(Context& ctx, const LearnArgs& a) {
  std::optional<Timestamp> at;
  if (!a.at.empty() && !(at = resolve_at(ctx, a.at))) return ExitCode::Failure;
  const Observed observed = a.observed == "cr" ? Observed::Cr : Observed::NotCr;

  PackStore store(ctx.config.pack_store_path);
  JurisdictionPack pack = store.load(a.pack, a.version);
  const std::string from_version = pack.version;

  CriterionNode* node = nullptr;
  for (auto& path : pack.paths) {
    if ((node = find_criterion(path.root, a.criterion))) break;
  }
  if (!node || !node->is_leaf()) {
    return ctx.fail(ExitCode::Failure, "pack " + pack.pack_id + "@" + pack.version + " has no leaf criterion '" +
                                           a.criterion + "'");
  }
  EvidenceSpec* spec = nullptr;
  for (auto& s : node->evidence_specs) {
    if (s.evidence_id == a.evidence_id) spec = &s;
  }
  if (!spec) {
    return ctx.fail(ExitCode::Failure, "criterion '" + a.criterion + "' has no evidence '" + a.evidence_id + "'");
  }

  const LikelihoodRow before = spec->likelihood;
  spec->likelihood = learn_count(before, observed, a.weight);

  const auto versions = store.versions(pack.pack_id);
  const Version latest = versions.empty() ? *Version::parse(pack.version) : versions.back();
  const Version next = a.bump == "major" ? latest.next_major() : a.bump == "minor" ? latest.next_minor() : latest.next_patch();
  pack.version = next.to_string();
  pack.created_at = at.value_or(now_utc());
  const auto stored = store.store(pack);

  const auto row_json = [](const LikelihoodRow& r) {
    return json{{"count_given_cr", r.count_given_cr},
                {"count_given_not_cr", r.count_given_not_cr},
                {"p_e_given_cr", r.p_cr()},
                {"p_e_given_not_cr", r.p_not_cr()}};
  };
  ctx.body["pack_id"] = pack.pack_id;
  ctx.body["from_version"] = from_version;
  ctx.body["version"] = pack.version;
  ctx.body["criterion_id"] = a.criterion;
  ctx.body["evidence_id"] = a.evidence_id;
  ctx.body["before"] = row_json(before);
  ctx.body["after"] = row_json(spec->likelihood);
  ctx.body["file"] = stored.file.string();
  if (!ctx.json_mode()) {
    const auto& r = spec->likelihood;
    ctx.out << a.evidence_id << " on " << a.criterion << ": counts (" << before.count_given_cr << ", "
            << before.count_given_not_cr << ") -> (" << r.count_given_cr << ", " << r.count_given_not_cr
            << "), P(E|Cr)=" << fixed4(r.p_cr()) << " P(E|not Cr)=" << fixed4(r.p_not_cr()) << "\n";
    ctx.out << "stored " << pack.pack_id << "@" << pack.version << " (from " << from_version << ") -> "
            << stored.file.string() << "\n";
  }
  return ExitCode::Ok;
}

// ----------------------------------------------------------------- explain

struct ExplainArgs {
  std::string trace;
  std::string audience = "operator";
};

ExitCode cmd_explain(Context& ctx, const ExplainArgs& a) {
  const auto audience = parse_audience(a.audience);
  if (!audience) return ctx.fail(ExitCode::Failure, "unknown audience '" + a.audience + "' (operator, auditor)");
  auto text = read_text(a.trace);
  if (!text) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.trace);
  try {
    const Trace trace = import_trace(*text);
    const std::string rendered = render_explanation(trace, *audience);
    ctx.body["trace_id"] = trace.header().trace_id;
    ctx.body["head_hash"] = trace.head_hash();
    ctx.body["text"] = rendered;
    if (!ctx.json_mode()) ctx.out << rendered;
    return ExitCode::Ok;
  } catch (const ChainBrokenError& e) {
    if (auto last = e.last_valid_index()) {
      ctx.body["last_valid_index"] = *last;
    } else {
      ctx.body["last_valid_index"] = nullptr;
    }
    std::string message = std::string("trace does not verify: ") + e.what();
    message += e.last_valid_index() ? "; last valid event is " + std::to_string(*e.last_valid_index())
                                    : "; no event can be trusted";
    return ctx.fail(ExitCode::ChainBroken, message, ErrorCode::ChainBroken);
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string pack;
  std::string version = "latest";
  std::string path;
  std::string scenario;
  std::string tick;
  std::string policy;
};

struct Batch {
  Timestamp at;
  std::vector<EvidenceRecord> add;
  std::vector<std::string> retract;
};

std::optional<std::vector<Batch>> parse_scenario(Context& ctx, const std::string& text, const std::string& file) {
  const json j = json::parse(text, nullptr, false);
  const auto bad = [&](const std::string& message) -> std::optional<std::vector<Batch>> {
    ctx.fail(ExitCode::Failure, file + ": " + message);
    return std::nullopt;
  };
  if (j.is_discarded()) return bad("not valid JSON");
  if (!j.is_object() || !j.contains("batches") || !j["batches"].is_array()) {
    return bad("expected an object with a 'batches' array");
  }
  std::vector<Batch> batches;
  std::vector<Diagnostic> diags;
  for (std::size_t i = 0; i < j["batches"].size(); ++i) {
    const auto& b = j["batches"][i];
    const std::string where = "batch " + std::to_string(i + 1);
    if (!b.is_object() || !b.contains("at") || !b["at"].is_string()) return bad(where + " needs an 'at' timestamp");
    auto at = parse_timestamp(b["at"].get<std::string>());
    if (!at) return bad(where + " has a bad timestamp");
    Batch batch{*at, {}, {}};
    if (b.contains("add")) {
      if (!b["add"].is_array()) return bad(where + ": 'add' must be an array of evidence records");
      for (const auto& r : b["add"]) {
        auto rec = record_from_json(r, diags, Location{0, 0, "/batches/" + std::to_string(i) + "/add"});
        if (rec) batch.add.push_back(std::move(*rec));
      }
    }
    if (b.contains("retract")) {
      if (!b["retract"].is_array()) return bad(where + ": 'retract' must be an array of record ids");
      for (const auto& id : b["retract"]) {
        if (!id.is_string()) return bad(where + ": 'retract' must be an array of record ids");
        batch.retract.push_back(id.get<std::string>());
      }
    }
    batches.push_back(std::move(batch));
  }
  ctx.diagnostics_to_err(diags, file);
  if (has_errors(diags)) return bad("scenario has malformed evidence records");
  std::stable_sort(batches.begin(), batches.end(), [](const Batch& x, const Batch& y) { return x.at < y.at; });
  return batches;
}

ExitCode cmd_simulate(Context& ctx, const SimulateArgs& a) {
  auto policy = resolve_policy(ctx, a.policy);
  if (!policy) return ExitCode::Failure;
  std::optional<std::chrono::milliseconds> tick;
  if (!a.tick.empty()) {
    tick = parse_duration(a.tick);
    if (!tick || tick->count() <= 0) return ctx.fail(ExitCode::Failure, "--tick '" + a.tick + "' is not a positive duration");
  }
  auto text = read_text(a.scenario);
  if (!text) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.scenario);
  auto batches = parse_scenario(ctx, *text, a.scenario);
  if (!batches) return ExitCode::Failure;

  PackStore store(ctx.config.pack_store_path);
  const auto pack = store.load(a.pack, a.version);
  const auto* path = resolve_path(ctx, pack, a.path);
  if (!path) return ExitCode::Failure;

  ctx.body["pack_id"] = pack.pack_id;
  ctx.body["version"] = pack.version;
  ctx.body["path_id"] = path->path_id;
  ctx.body["policy"] = policy->to_string();
  ctx.body["ticks"] = json::array();
  if (batches->empty()) {
    ctx.body["first_change"] = nullptr;
    if (!ctx.json_mode()) ctx.out << "no ticks\n";
    return ExitCode::Ok;
  }

  std::vector<Timestamp> ticks;
  if (tick) {
    for (Timestamp t = batches->front().at; t <= batches->back().at; t += *tick) ticks.push_back(t);
  } else {
    for (const auto& b : *batches) {
      if (ticks.empty() || ticks.back() != b.at) ticks.push_back(b.at);
    }
  }

  std::map<std::string, EvidenceRecord> live;
  std::size_t next_batch = 0;
  std::optional<std::string> previous;
  std::optional<std::size_t> first_change;
  for (std::size_t k = 0; k < ticks.size(); ++k) {
    for (; next_batch < batches->size() && (*batches)[next_batch].at <= ticks[k]; ++next_batch) {
      const auto& b = (*batches)[next_batch];
      for (const auto& id : b.retract) live.erase(id);
      for (const auto& r : b.add) live.insert_or_assign(r.record_id, r);
    }
    std::vector<EvidenceRecord> current;
    for (const auto& [id, r] : live) current.push_back(r);
    auto ingested = ingest(std::move(current));

    std::optional<SessionResult> session;
    try {
      session = run_session(pack, path->path_id, ingested.records, *policy, SessionOptions{ticks[k]});
    } catch (const SessionError& e) {
      return ctx.fail(ExitCode::Failure, "tick " + std::to_string(k + 1) + ": " + e.what(), e.code());
    }
    const SessionResult& result = *session;
    const auto& d = result.decision;
    const std::string status(to_string(d.root_status.status));
    ctx.body["ticks"].push_back({{"tick", k + 1},
                                 {"at", format_timestamp(ticks[k])},
                                 {"records", ingested.records.size()},
                                 {"action", d.action.action_id},
                                 {"status", status},
                                 {"head_hash", result.trace.head_hash()}});
    if (!ctx.json_mode()) {
      ctx.out << "tick " << (k + 1) << " " << format_timestamp(ticks[k]) << ": " << d.action.action_id << " ("
              << status << ", " << ingested.records.size() << " records)\n";
    }
    if (previous && *previous != d.action.action_id && !first_change) {
      first_change = k + 1;
      ctx.body["first_change"] = {{"tick", k + 1},
                                  {"at", format_timestamp(ticks[k])},
                                  {"from", *previous},
                                  {"to", d.action.action_id}};
      if (!ctx.json_mode()) {
        ctx.out << "decision changes at tick " << (k + 1) << ": " << *previous << " -> " << d.action.action_id << "\n";
      }
    }
    previous = d.action.action_id;
  }
  if (!first_change) {
    ctx.body["first_change"] = nullptr;
    if (!ctx.json_mode()) ctx.out << "decision constant across " << ticks.size() << " tick(s): " << *previous << "\n";
  }
  return ExitCode::Ok;
}

// ------------------------------------------------------------------ review

struct ReviewArgs {
  std::string draft;
  std::string verdict;
  std::string reviewer;
  std::string note;
  std::string at;
};

ExitCode cmd_review(Context& ctx, const ReviewArgs& a) {
  std::optional<Timestamp> at;
  if (!a.at.empty() && !(at = resolve_at(ctx, a.at))) return ExitCode::Failure;
  auto text = read_text(a.draft);
  if (!text) return ctx.fail(ExitCode::Unreadable, "cannot read " + a.draft);
  const json j = json::parse(*text, nullptr, false);
  if (j.is_discarded()) return ctx.fail(ExitCode::Failure, a.draft + " is not valid JSON");
  std::vector<Diagnostic> diags;
  auto result = extraction_result_from_json(j, diags);
  ctx.diagnostics_to_err(diags, a.draft);
  if (!result) return ctx.fail(ExitCode::Failure, a.draft + " is not a readable extraction draft");
  if (result->review_status != ReviewStatus::Draft) {
    return ctx.fail(ExitCode::Failure, a.draft + " was already reviewed (" +
                                           std::string(to_string(result->review_status)) + ")");
  }

  const auto verdict = a.verdict == "verified" ? ReviewStatus::Verified : ReviewStatus::Rejected;
  record_review(*result, ReviewAction{a.reviewer, verdict, a.note, at.value_or(now_utc())});
  write_text(a.draft, to_json(*result).dump(2) + "\n");
  ctx.body["draft"] = a.draft;
  ctx.body["review_status"] = std::string(to_string(result->review_status));
  if (!ctx.json_mode()) ctx.out << a.draft << ": " << to_string(result->review_status) << " by " << a.reviewer << "\n";

  if (verdict == ReviewStatus::Verified) {
    PackStore store(ctx.config.pack_store_path);
    const auto stored = promote(store, *result);
    ctx.body["stored"] = {{"pack_id", stored.pack_id}, {"version", stored.version}, {"file", stored.file.string()}};
    if (!ctx.json_mode()) ctx.out << "stored " << stored.pack_id << "@" << stored.version << " -> " << stored.file.string() << "\n";
  }
  return ExitCode::Ok;
}

}  // namespace

Config load_config(const std::string& file) {
  auto text = read_text(file);
  if (!text) throw Error(ErrorCode::Io, "cannot read config " + file);
  const json j = json::parse(*text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "config " + file + " is not a JSON object");
  Config c;
  for (const auto& [key, value] : j.items()) {
    const auto want_string = [&]() -> std::string {
      if (!value.is_string()) throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be a string");
      return value.get<std::string>();
    };
    if (key == "pack_store_path") {
      c.pack_store_path = want_string();
    } else if (key == "fixture_store_path") {
      c.fixture_store_path = want_string();
    } else if (key == "default_policy") {
      c.default_policy = want_string();
      if (!DecisionPolicy::parse(c.default_policy)) {
        throw Error(ErrorCode::InvalidArgument, "config default_policy '" + c.default_policy + "' does not parse");
      }
    } else if (key == "output_format") {
      const auto f = want_string();
      if (f != "human" && f != "json") throw Error(ErrorCode::InvalidArgument, "config output_format must be human or json");
      c.output_format = f == "json" ? OutputFormat::Json : OutputFormat::Human;
    } else if (key == "verbosity") {
      if (!value.is_number_integer()) throw Error(ErrorCode::InvalidArgument, "config verbosity must be an integer");
      c.verbosity = value.get<int>();
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
  return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lexpath: statutes to auditable machine decisions"};
  app.name("lexpath");
  app.require_subcommand(1);

  std::string config_file, store_flag, fixtures_flag, output_flag;
  int verbosity = 0;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--store", store_flag, "pack store directory (env LEXPATH_PACK_STORE)");
  app.add_option("--fixtures", fixtures_flag, "fixture store directory (env LEXPATH_FIXTURES)");
  app.add_option("--output", output_flag, "human or json")->check(CLI::IsMember({"human", "json"}));
  app.add_flag("-v,--verbose", verbosity, "more detail on stderr");

  ValidateArgs validate;
  auto* v = app.add_subcommand("validate", "check a decision-path document (.lexpath or .json)");
  v->add_option("file", validate.file)->required();

  StoreArgs store;
  auto* s = app.add_subcommand("store", "add a validated pack document to the pack store");
  s->add_option("file", store.file)->required();

  ExtractArgs extract;
  auto* x = app.add_subcommand("extract", "turn statute text into a draft pack via a model endpoint");
  x->add_option("statute", extract.statute, "statute text file")->required();
  x->add_option("--template", extract.template_id, "prompt template id");
  auto* live = x->add_flag("--live", extract.live, "call the endpoint and record a fixture");
  x->add_flag("--replay", extract.replay, "answer from the fixture store (default)")->excludes(live);
  x->add_option("--out", extract.out, "draft file to write");
  x->add_option("--reference", extract.reference, "reference pack document to diff the draft against");
  x->add_option("--endpoint", extract.endpoint, "model endpoint URL for --live");
  x->add_option("--token-env", extract.token_env, "environment variable holding the bearer token");
  x->add_option("--timeout", extract.timeout, "endpoint timeout, e.g. 30s");
  x->add_option("--citation", extract.citation, "citation recorded on the draft");

  InferArgs infer;
  auto* i = app.add_subcommand("infer", "decide a path from evidence; exit 0 apply, 10 reject, 11 undetermined");
  i->add_option("--pack", infer.pack, "pack id")->required();
  i->add_option("--version", infer.version, "version or constraint");
  i->add_option("--path", infer.path, "decision path id");
  i->add_option("--evidence", infer.evidence, "evidence JSON Lines file");
  i->add_option("--policy", infer.policy, "argmax, threshold[:tau] or certainty[:eps]");
  i->add_option("--trace-out", infer.trace_out, "write the trace as JSON Lines");
  i->add_option("--at", infer.at, "evaluation instant (ISO-8601)");

  LearnArgs learn;
  auto* l = app.add_subcommand("learn", "add a pseudo-count to a likelihood row, producing a new pack version");
  l->add_option("--pack", learn.pack)->required();
  l->add_option("--version", learn.version, "version or constraint to learn from");
  l->add_option("--criterion", learn.criterion)->required();
  l->add_option("--evidence-id", learn.evidence_id)->required();
  l->add_option("--observed", learn.observed, "cr or not_cr")->required()->check(CLI::IsMember({"cr", "not_cr"}));
  l->add_option("--weight", learn.weight, "pseudo-count to add (positive)");
  l->add_option("--bump", learn.bump, "patch, minor or major")->check(CLI::IsMember({"patch", "minor", "major"}));
  l->add_option("--at", learn.at, "created timestamp of the new version");

  ExplainArgs explain;
  auto* e = app.add_subcommand("explain", "render a trace for an operator or an auditor");
  e->add_option("--trace", explain.trace)->required();
  e->add_option("--audience", explain.audience, "operator or auditor");

  SimulateArgs simulate;
  auto* m = app.add_subcommand("simulate", "re-run a path over timestamped evidence batches");
  m->add_option("--pack", simulate.pack)->required();
  m->add_option("--version", simulate.version);
  m->add_option("--path", simulate.path);
  m->add_option("--scenario", simulate.scenario)->required();
  m->add_option("--tick", simulate.tick, "re-evaluation cadence, e.g. 1h; default one tick per batch");
  m->add_option("--policy", simulate.policy);

  ReviewArgs review;
  auto* r = app.add_subcommand("review", "record a reviewer verdict on a draft; VERIFIED drafts enter the store");
  r->add_option("--draft", review.draft)->required();
  r->add_option("--verdict", review.verdict)->required()->check(CLI::IsMember({"verified", "rejected"}));
  r->add_option("--reviewer", review.reviewer)->required();
  r->add_option("--note", review.note);
  r->add_option("--at", review.at);

  std::vector<std::string> argv_storage{"lexpath"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return static_cast<int>(ExitCode::Failure);
  }

  Config config;
  try {
    if (!config_file.empty()) config = load_config(config_file);
  } catch (const Error& ex) {
    err << "lexpath: " << ex.what() << "\n";
    return static_cast<int>(exit_code_for(ex.code()));
  }
  if (const char* env = std::getenv("LEXPATH_PACK_STORE"); env && *env) config.pack_store_path = env;
  if (const char* env = std::getenv("LEXPATH_FIXTURES"); env && *env) config.fixture_store_path = env;
  if (!store_flag.empty()) config.pack_store_path = store_flag;
  if (!fixtures_flag.empty()) config.fixture_store_path = fixtures_flag;
  if (!output_flag.empty()) config.output_format = output_flag == "json" ? OutputFormat::Json : OutputFormat::Human;
  config.verbosity += verbosity;

  Context ctx(config, out, err);
  std::string command;
  ExitCode code = ExitCode::Failure;
  try {
    const std::vector<std::pair<CLI::App*, std::function<ExitCode()>>> handlers = {
        {v, [&] { return cmd_validate(ctx, validate); }}, {s, [&] { return cmd_store(ctx, store); }},
        {x, [&] { return cmd_extract(ctx, extract); }},   {i, [&] { return cmd_infer(ctx, infer); }},
        {l, [&] { return cmd_learn(ctx, learn); }},       {e, [&] { return cmd_explain(ctx, explain); }},
        {m, [&] { return cmd_simulate(ctx, simulate); }}, {r, [&] { return cmd_review(ctx, review); }},
    };
    for (const auto& [sub, handler] : handlers) {
      if (sub->parsed()) {
        command = sub->get_name();
        ctx.verbose("pack store: " + config.pack_store_path);
        code = handler();
        break;
      }
    }
  } catch (const Error& ex) {
    code = ctx.fail(ex);
  } catch (const std::exception& ex) {
    code = ctx.fail(ExitCode::Failure, std::string("internal error: ") + ex.what());
  }

  if (ctx.json_mode()) {
    json doc = ctx.body;
    doc["schema"] = kSchema;
    doc["command"] = command;
    doc["exit_code"] = static_cast<int>(code);
    doc["diagnostics"] = ctx.diagnostics;
    out << doc.dump(2) << "\n";
  }
  return static_cast<int>(code);
}

}  // namespace lexpath::cli
