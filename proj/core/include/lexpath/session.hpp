#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lexpath/error.hpp"
#include "lexpath/evidence.hpp"
#include "lexpath/inference.hpp"
#include "lexpath/rule_ir.hpp"
#include "lexpath/trace.hpp"

namespace lexpath {

struct SessionOptions {
  /// Instant stamped on non-evidence events. Defaults to the latest evidence
  /// timestamp, or the pack's created_at when there is no evidence, so that
  /// a session is a pure function of its inputs.
  std::optional<Timestamp> evaluated_at;
};

struct SessionResult {
  Decision decision;
  Trace trace;
  /// Routing diagnostics for records that were excluded from the session.
  std::vector<Diagnostic> diagnostics;
};

/// An inference failure together with the trace recorded up to (and
/// including) the ERROR event.
class SessionError : public Error {
 public:
  SessionError(ErrorCode code, const std::string& message, Trace trace);
  const Trace& trace() const noexcept { return trace_; }

 private:
  Trace trace_;
};

/// Evaluates every leaf of `path_id` against its routed observations,
/// composes the tree, deduces the consequence, and records each numeric
/// step into a trace. Throws NotFound for an unknown path and SessionError
/// for UnknownEvidence / DegenerateUpdate.
SessionResult run_session(const JurisdictionPack& pack, std::string_view path_id,
                          std::span<const EvidenceRecord> evidence, const DecisionPolicy& policy,
                          const SessionOptions& options = {});

}  // namespace lexpath
