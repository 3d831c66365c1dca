#include "lexpath/trace.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lexpath/error.hpp"
#include "lexpath/hash.hpp"

namespace lexpath {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatTag = "lexpath.trace.v1";

constexpr EventKind kAllKinds[] = {
    EventKind::SessionStart, EventKind::PriorLoaded, EventKind::EvidenceApplied,
    EventKind::Posterior,    EventKind::LeafStatus,  EventKind::TreeStatus,
    EventKind::Deduction,    EventKind::Decision,    EventKind::Error,
};

json header_json(const TraceHeader& h) {
  return json{{"pack_id", h.pack_id},
              {"path_id", h.path_id},
              {"policy", h.policy},
              {"trace_id", h.trace_id},
              {"version", h.version}};
}

json event_json(const TraceEvent& e) {
  return json{{"kind", std::string(to_string(e.kind))},
              {"subjects", e.subjects},
              {"timestamp", format_timestamp(e.timestamp)},
              {"values", e.values}};
}

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

const std::string* lookup(const std::map<std::string, std::string>& m, std::string_view key) {
  auto it = m.find(std::string(key));
  return it == m.end() ? nullptr : &it->second;
}

std::map<std::string, std::string> string_map(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected an object of strings");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw std::invalid_argument("field '" + k + "' is not a string");
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::SessionStart: return "SESSION_START";
    case EventKind::PriorLoaded: return "PRIOR_LOADED";
    case EventKind::EvidenceApplied: return "EVIDENCE_APPLIED";
    case EventKind::Posterior: return "POSTERIOR";
    case EventKind::LeafStatus: return "LEAF_STATUS";
    case EventKind::TreeStatus: return "TREE_STATUS";
    case EventKind::Deduction: return "DEDUCTION";
    case EventKind::Decision: return "DECISION";
    case EventKind::Error: return "ERROR";
  }
  return "ERROR";
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
  for (auto kind : kAllKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

const std::string* TraceEvent::subject(std::string_view key) const { return lookup(subjects, key); }
const std::string* TraceEvent::value(std::string_view key) const { return lookup(values, key); }

std::string genesis_hash(const TraceHeader& header) {
  return sha256_hex(std::string(kFormatTag) + "\n" + dump(header_json(header)));
}

std::string canonical_event_bytes(const TraceEvent& event) { return dump(event_json(event)); }

std::string chain_hash(std::string_view previous_hash, const TraceEvent& event) {
  std::string bytes(previous_hash);
  bytes += canonical_event_bytes(event);
  return sha256_hex(bytes);
}

std::string format_probability(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "probability is not finite");
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, end);
}

Trace::Trace(TraceHeader header) : header_(std::move(header)), head_hash_(genesis_hash(header_)) {}

Trace Trace::assemble(TraceHeader header, std::vector<TraceEvent> events, std::string head_hash) {
  Trace t(std::move(header));
  t.events_ = std::move(events);
  t.head_hash_ = std::move(head_hash);
  return t;
}

const TraceEvent& Trace::append(TraceEvent event) {
  const std::string expected = events_.empty() ? genesis_hash(header_) : events_.back().hash;
  if (head_hash_ != expected) {
    throw ChainBrokenError(events_.size(), "stored head hash does not match the last event");
  }
  event.hash = chain_hash(head_hash_, event);
  head_hash_ = event.hash;
  events_.push_back(std::move(event));
  return events_.back();
}

void Trace::verify() const {
  std::string previous = genesis_hash(header_);
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (chain_hash(previous, events_[i]) != events_[i].hash) {
      throw ChainBrokenError(i, "event hash does not match its content and predecessor");
    }
    previous = events_[i].hash;
  }
  if (previous != head_hash_) throw ChainBrokenError(events_.size(), "head hash does not match the last event");
}

bool Trace::verifies() const noexcept {
  try {
    verify();
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Trace append(Trace trace, TraceEvent event) {
  trace.append(std::move(event));
  return trace;
}

std::optional<Audience> parse_audience(std::string_view text) noexcept {
  if (text == "operator" || text == "OPERATOR") return Audience::Operator;
  if (text == "auditor" || text == "AUDITOR") return Audience::Auditor;
  return std::nullopt;
}

std::string export_trace(const Trace& trace, ExportFormat format) {
  trace.verify();
  if (format == ExportFormat::Text) return render_explanation(trace, Audience::Auditor);
  json header = header_json(trace.header());
  header["format"] = kFormatTag;
  header["head_hash"] = trace.head_hash();
  header["event_count"] = trace.size();
  std::string out = dump(header) + "\n";
  for (const auto& e : trace.events()) {
    json line = event_json(e);
    line["hash"] = e.hash;
    out += dump(line);
    out += '\n';
  }
  return out;
}

Trace import_trace(std::string_view jsonl) {
  std::vector<std::string_view> lines;
  while (!jsonl.empty()) {
    const auto nl = jsonl.find('\n');
    lines.push_back(jsonl.substr(0, nl));
    jsonl = nl == std::string_view::npos ? std::string_view{} : jsonl.substr(nl + 1);
  }
  if (lines.empty()) throw ChainBrokenError(0, "trace file is empty");

  TraceHeader header;
  std::string head;
  std::size_t count = 0;
  try {
    const json h = json::parse(lines[0]);
    if (h.at("format").get<std::string>() != kFormatTag) throw std::invalid_argument("unknown trace format");
    header.trace_id = h.at("trace_id").get<std::string>();
    header.pack_id = h.at("pack_id").get<std::string>();
    header.version = h.at("version").get<std::string>();
    header.path_id = h.at("path_id").get<std::string>();
    header.policy = h.at("policy").get<std::string>();
    head = h.at("head_hash").get<std::string>();
    count = h.at("event_count").get<std::size_t>();
    if (h.size() != 8) throw std::invalid_argument("unexpected header fields");
  } catch (const std::exception& e) {
    throw ChainBrokenError(0, std::string("trace header is unreadable: ") + e.what());
  }

  std::vector<TraceEvent> events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t index = i - 1;
    try {
      const json j = json::parse(lines[i]);
      if (!j.is_object() || j.size() != 5) throw std::invalid_argument("unexpected event fields");
      TraceEvent e;
      const auto kind = parse_event_kind(j.at("kind").get<std::string>());
      if (!kind) throw std::invalid_argument("unknown event kind");
      e.kind = *kind;
      e.subjects = string_map(j.at("subjects"));
      e.values = string_map(j.at("values"));
      const auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
      if (!ts) throw std::invalid_argument("bad timestamp");
      e.timestamp = *ts;
      e.hash = j.at("hash").get<std::string>();
      json canonical = event_json(e);
      canonical["hash"] = e.hash;
      if (dump(canonical) != lines[i]) throw std::invalid_argument("line is not in canonical form");
      events.push_back(std::move(e));
    } catch (const ChainBrokenError&) {
      throw;
    } catch (const std::exception& e) {
      throw ChainBrokenError(index, std::string("event line is corrupt: ") + e.what());
    }
  }
  if (events.size() != count) {
    throw ChainBrokenError(std::min(events.size(), count), "header declares " + std::to_string(count) +
                                                               " events but " + std::to_string(events.size()) +
                                                               " are present");
  }
  Trace trace = Trace::assemble(std::move(header), std::move(events), std::move(head));
  trace.verify();
  return trace;
}

}  // namespace lexpath
