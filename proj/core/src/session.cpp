#include "lexpath/session.hpp"

#include <algorithm>
#include <set>

#include "lexpath/hash.hpp"

namespace lexpath {

SessionError::SessionError(ErrorCode code, const std::string& message, Trace trace)
    : Error(code, message), trace_(std::move(trace)) {}

namespace {

std::string count(std::uint64_t n) { return std::to_string(n); }

std::string make_trace_id(const JurisdictionPack& pack, const DecisionPath& path,
                          std::span<const EvidenceRecord> evidence, const DecisionPolicy& policy, Timestamp at) {
  std::string material = pack.pack_id + "\n" + pack.version + "\n" + path.path_id + "\n" + policy.to_string() + "\n" +
                         format_timestamp(at) + "\n";
  material += to_json_lines(evidence);
  return sha256_hex(material).substr(0, 16);
}

std::string join_children(const CriterionNode& node) {
  std::string out;
  for (const auto& child : node.children) {
    if (!out.empty()) out += ',';
    out += child.criterion_id;
  }
  return out;
}

const char* inference_rule(Status root) {
  switch (root) {
    case Status::Established: return "modus_ponens";
    case Status::Rejected: return "criterion_rejected";
    case Status::Undetermined: return "no_valid_inference";
  }
  return "no_valid_inference";
}

class Recorder {
 public:
  Recorder(Trace& trace, Timestamp at) : trace_(trace), at_(at) {}

  void add(EventKind kind, std::map<std::string, std::string> subjects, std::map<std::string, std::string> values,
           std::optional<Timestamp> ts = std::nullopt) {
    TraceEvent e;
    e.kind = kind;
    e.subjects = std::move(subjects);
    e.values = std::move(values);
    e.timestamp = ts.value_or(at_);
    trace_.append(std::move(e));
  }

 private:
  Trace& trace_;
  Timestamp at_;
};

}  // namespace

SessionResult run_session(const JurisdictionPack& pack, std::string_view path_id,
                          std::span<const EvidenceRecord> evidence, const DecisionPolicy& policy,
                          const SessionOptions& options) {
  const DecisionPath* path = pack.find_path(path_id);
  if (!path) throw Error(ErrorCode::NotFound, "pack '" + pack.pack_id + "' has no path '" + std::string(path_id) + "'");

  Timestamp at = pack.created_at;
  if (options.evaluated_at) {
    at = *options.evaluated_at;
  } else if (!evidence.empty()) {
    at = std::max_element(evidence.begin(), evidence.end(), [](const auto& a, const auto& b) {
           return a.timestamp < b.timestamp;
         })->timestamp;
  }

  Trace trace(TraceHeader{make_trace_id(pack, *path, evidence, policy, at), pack.pack_id, pack.version,
                          path->path_id, policy.to_string()});
  Recorder rec(trace, at);

  std::set<std::string, std::less<>> declared;
  for (const auto& p : pack.paths) {
    for_each_node(p.root, [&](const CriterionNode& node, std::size_t) {
      for (const auto& spec : node.evidence_specs) declared.insert(spec.evidence_id);
    });
  }

  SessionResult result{Decision{}, trace, {}};
  std::map<std::string, std::string> error_subjects;
  try {
    for (const auto& r : evidence) {
      if (!declared.count(r.evidence_id)) {
        error_subjects = {{"record_id", r.record_id}, {"evidence_id", r.evidence_id}};
        rec.add(EventKind::SessionStart,
                {{"pack_id", pack.pack_id}, {"version", pack.version}, {"path_id", path->path_id},
                 {"policy", policy.to_string()}, {"consequence_id", path->consequence.consequence_id}},
                {{"evidence_count", count(evidence.size())}});
        throw Error(ErrorCode::UnknownEvidence,
                    "record '" + r.record_id + "' names evidence '" + r.evidence_id + "', which the pack does not declare");
      }
    }

    auto routed = match_to_spec(evidence, pack);
    std::vector<const CriterionNode*> order;
    std::size_t applied = 0;
    for_each_node(path->root, [&](const CriterionNode& node, std::size_t) {
      if (!node.is_leaf()) return;
      order.push_back(&node);
      if (auto it = routed.by_criterion.find(node.criterion_id); it != routed.by_criterion.end()) {
        applied += it->second.size();
      }
    });
    rec.add(EventKind::SessionStart,
            {{"pack_id", pack.pack_id},
             {"version", pack.version},
             {"path_id", path->path_id},
             {"policy", policy.to_string()},
             {"consequence_id", path->consequence.consequence_id},
             {"consequence_text", path->consequence.text}},
            {{"evidence_count", count(applied)}, {"excluded_count", count(routed.excluded)}});
    result.diagnostics = std::move(routed.diagnostics);

    StatusMap leaves;

    for (const CriterionNode* leaf : order) {
      const auto& id = leaf->criterion_id;
      if (!leaf->prior) throw Error(ErrorCode::InvalidArgument, "leaf '" + id + "' has no prior");
      PosteriorState state = PosteriorState::from_prior(*leaf->prior);
      rec.add(EventKind::PriorLoaded, {{"criterion_id", id}, {"criterion_text", leaf->text}},
              {{"p_cr", format_probability(state.p_cr)}, {"p_not_cr", format_probability(state.p_not_cr)}});

      static const std::vector<EvidenceRecord> none;
      auto found = routed.by_criterion.find(id);
      const auto& observations = found == routed.by_criterion.end() ? none : found->second;
      for (const auto& r : observations) {
        const EvidenceSpec* spec = leaf->find_evidence(r.evidence_id);
        error_subjects = {{"criterion_id", id}, {"evidence_id", r.evidence_id}, {"record_id", r.record_id}};
        if (!spec) throw Error(ErrorCode::UnknownEvidence, "evidence '" + r.evidence_id + "' is not declared on '" + id + "'");
        const PosteriorState next = bayes_update(state, spec->likelihood);
        const auto& row = spec->likelihood;
        rec.add(EventKind::EvidenceApplied,
                {{"criterion_id", id},
                 {"evidence_id", r.evidence_id},
                 {"evidence_description", spec->description},
                 {"record_id", r.record_id},
                 {"source_kind", std::string(to_string(r.source.kind))},
                 {"source_id", r.source.source_id},
                 {"payload_digest", r.payload_digest}},
                {{"count_given_cr", format_probability(row.count_given_cr)},
                 {"count_given_not_cr", format_probability(row.count_given_not_cr)},
                 {"p_e_given_cr", format_probability(row.p_cr())},
                 {"p_e_given_not_cr", format_probability(row.p_not_cr())}},
                r.timestamp);
        rec.add(EventKind::Posterior, {{"criterion_id", id}, {"evidence_id", r.evidence_id}},
                {{"p_cr", format_probability(next.p_cr)},
                 {"p_not_cr", format_probability(next.p_not_cr)},
                 {"update_count", count(next.update_count)}});
        state = next;
      }
      error_subjects.clear();

      const CriterionStatus status{policy.classify(state), state, policy};
      rec.add(EventKind::LeafStatus,
              {{"criterion_id", id},
               {"criterion_text", leaf->text},
               {"status", std::string(to_string(status.status))},
               {"policy", policy.to_string()}},
              {{"p_cr", format_probability(state.p_cr)},
               {"p_not_cr", format_probability(state.p_not_cr)},
               {"update_count", count(state.update_count)}});
      leaves.emplace(id, status);
    }

    const auto root = evaluate_tree(path->root, leaves, [&](const CriterionNode& node, const CriterionStatus& s) {
      rec.add(EventKind::TreeStatus,
              {{"criterion_id", node.criterion_id},
               {"criterion_text", node.text},
               {"kind", std::string(to_string(node.kind))},
               {"children", join_children(node)},
               {"status", std::string(to_string(s.status))}},
              {});
    });

    rec.add(EventKind::Deduction,
            {{"criterion_id", path->root.criterion_id},
             {"criterion_text", path->root.text},
             {"consequence_id", path->consequence.consequence_id},
             {"consequence_text", path->consequence.text},
             {"root_status", std::string(to_string(root.status))},
             {"inference", inference_rule(root.status)}},
            {});

    result.decision = deduce(*path, root);
    result.decision.trace_ref = trace.header().trace_id;
    rec.add(EventKind::Decision,
            {{"path_id", path->path_id},
             {"consequence_id", result.decision.consequence_id},
             {"status", std::string(to_string(root.status))},
             {"action_id", result.decision.action.action_id},
             {"action_label", result.decision.action.label}},
            {});
  } catch (const Error& e) {
    auto subjects = error_subjects;
    subjects["code"] = std::string(to_string(e.code()));
    std::string message = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (message.starts_with(prefix)) message.erase(0, prefix.size());
    subjects["message"] = message;
    rec.add(EventKind::Error, std::move(subjects), {});
    throw SessionError(e.code(), message, trace);
  }
  result.trace = std::move(trace);
  return result;
}

}  // namespace lexpath
