#pragma once

// Append-only, SHA-256 hash-chained audit log of an inference session.
//
// Event i stores hash_i = SHA256(hash_{i-1} || canonical bytes of event i),
// with hash_{-1} the genesis hash derived from the trace header. Exports are
// JSON Lines: a header object followed by one canonical event per line.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/timestamp.hpp"

namespace lexpath {

enum class EventKind {
  SessionStart,
  PriorLoaded,
  EvidenceApplied,
  Posterior,
  LeafStatus,
  TreeStatus,
  Deduction,
  Decision,
  Error,
};

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view text) noexcept;

struct TraceEvent {
  EventKind kind = EventKind::SessionStart;
  /// Identifiers and texts the event is about (criterion_id, evidence_id, ...).
  std::map<std::string, std::string> subjects;
  /// Numeric payload as decimal strings (see format_probability).
  std::map<std::string, std::string> values;
  Timestamp timestamp{};
  /// Chain hash, filled by Trace::append.
  std::string hash;

  const std::string* subject(std::string_view key) const;
  const std::string* value(std::string_view key) const;
  bool operator==(const TraceEvent&) const = default;
};

struct TraceHeader {
  std::string trace_id;
  std::string pack_id;
  std::string version;
  std::string path_id;
  std::string policy;

  bool operator==(const TraceHeader&) const = default;
};

class Trace {
 public:
  explicit Trace(TraceHeader header);

  /// Reassembles a trace from stored parts without checking it; call
  /// verify() before trusting the result.
  static Trace assemble(TraceHeader header, std::vector<TraceEvent> events, std::string head_hash);

  const TraceHeader& header() const noexcept { return header_; }
  std::span<const TraceEvent> events() const noexcept { return events_; }
  const std::string& head_hash() const noexcept { return head_hash_; }
  bool empty() const noexcept { return events_.empty(); }
  std::size_t size() const noexcept { return events_.size(); }

  /// Chains `event` onto the head. Throws ChainBroken when the stored head
  /// hash is not the hash of the last event.
  const TraceEvent& append(TraceEvent event);

  /// Recomputes the whole chain; throws ChainBrokenError at the first event
  /// whose hash does not match.
  void verify() const;
  bool verifies() const noexcept;

  bool operator==(const Trace&) const = default;

 private:
  TraceHeader header_;
  std::vector<TraceEvent> events_;
  std::string head_hash_;
};

/// Value-semantics append: returns a copy of `trace` with `event` chained on.
Trace append(Trace trace, TraceEvent event);

std::string genesis_hash(const TraceHeader& header);
/// Compact, key-sorted JSON of the event without its hash field.
std::string canonical_event_bytes(const TraceEvent& event);
std::string chain_hash(std::string_view previous_hash, const TraceEvent& event);

/// 17 significant digits, locale independent; parses back to the same double.
std::string format_probability(double value);

enum class ExportFormat { Jsonl, Text };
enum class Audience { Operator, Auditor };

std::optional<Audience> parse_audience(std::string_view text) noexcept;

/// Throws ChainBroken if the trace does not verify.
std::string export_trace(const Trace& trace, ExportFormat format);

/// Parses and verifies a JSONL export. Malformed, non-canonical, or missing
/// lines raise ChainBrokenError at the first event that cannot be trusted.
Trace import_trace(std::string_view jsonl);

/// OPERATOR: one paragraph per decision. AUDITOR: every event, in order.
/// Throws ChainBroken if the trace does not verify.
std::string render_explanation(const Trace& trace, Audience audience);

}  // namespace lexpath
