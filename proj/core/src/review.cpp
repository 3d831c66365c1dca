#include "lexpath/review.hpp"

#include <map>
#include <sstream>

namespace lexpath {

std::string_view to_string(EditKind kind) noexcept {
  switch (kind) {
    case EditKind::AddedPath: return "ADDED_PATH";
    case EditKind::RemovedPath: return "REMOVED_PATH";
    case EditKind::AddedCriterion: return "ADDED_CRITERION";
    case EditKind::RemovedCriterion: return "REMOVED_CRITERION";
    case EditKind::RenamedCriterion: return "RENAMED_CRITERION";
    case EditKind::ChangedCombinator: return "CHANGED_COMBINATOR";
    case EditKind::ChangedConsequence: return "CHANGED_CONSEQUENCE";
  }
  return "?";
}

std::string_view to_string(Equivalence verdict) noexcept {
  switch (verdict) {
    case Equivalence::Equivalent: return "EQUIVALENT";
    case Equivalence::MinorEdits: return "MINOR_EDITS";
    case Equivalence::MajorEdits: return "MAJOR_EDITS";
  }
  return "?";
}

namespace {

template <typename T>
struct Alignment {
  std::vector<std::pair<const T*, const T*>> pairs;  // (draft, reference)
  std::vector<const T*> only_draft;
  std::vector<const T*> only_reference;
};

// Pairs items by primary key, then pairs the leftovers by the k-th
// occurrence of an equal secondary key.
template <typename T, typename Primary, typename Secondary>
Alignment<T> align(const std::vector<T>& draft, const std::vector<T>& reference, Primary primary,
                   Secondary secondary) {
  Alignment<T> out;
  std::map<std::string, std::vector<const T*>> by_primary;
  for (const auto& r : reference) by_primary[primary(r)].push_back(&r);
  std::vector<const T*> left_draft;
  std::map<const T*, bool> used;
  for (const auto& d : draft) {
    auto it = by_primary.find(primary(d));
    if (it != by_primary.end() && !it->second.empty()) {
      out.pairs.emplace_back(&d, it->second.front());
      used[it->second.front()] = true;
      it->second.erase(it->second.begin());
    } else {
      left_draft.push_back(&d);
    }
  }
  std::map<std::string, std::vector<const T*>> by_secondary;
  for (const auto& r : reference) {
    if (!used.count(&r)) by_secondary[secondary(r)].push_back(&r);
  }
  for (const T* d : left_draft) {
    auto it = by_secondary.find(secondary(*d));
    if (it != by_secondary.end() && !it->second.empty()) {
      out.pairs.emplace_back(d, it->second.front());
      used[it->second.front()] = true;
      it->second.erase(it->second.begin());
    } else {
      out.only_draft.push_back(d);
    }
  }
  for (const auto& r : reference) {
    if (!used.count(&r)) out.only_reference.push_back(&r);
  }
  return out;
}

std::string describe_row(const LikelihoodRow& row) {
  std::ostringstream s;
  s << "(" << row.count_given_cr << ", " << row.count_given_not_cr << ")";
  return s.str();
}

class Differ {
 public:
  explicit Differ(ReviewReport& report) : report_(report) {}

  void paths(const JurisdictionPack& draft, const JurisdictionPack& reference) {
    auto aligned = align(
        draft.paths, reference.paths, [](const DecisionPath& p) { return p.path_id; },
        [](const DecisionPath& p) { return p.consequence.consequence_id; });
    for (auto [d, r] : aligned.pairs) {
      if (d->path_id != r->path_id) note(r->path_id, "path id differs: draft '" + d->path_id + "'");
      consequence(r->path_id, d->consequence, r->consequence);
      node(r->path_id, d->root, r->root);
    }
    for (const auto* d : aligned.only_draft) {
      edit(EditKind::AddedPath, d->path_id, d->path_id, "path present only in the draft");
      subtree(EditKind::AddedCriterion, d->path_id, d->root);
    }
    for (const auto* r : aligned.only_reference) {
      edit(EditKind::RemovedPath, r->path_id, r->path_id, "path missing from the draft");
      subtree(EditKind::RemovedCriterion, r->path_id, r->root);
    }
  }

 private:
  void edit(EditKind kind, const std::string& path, const std::string& subject, std::string detail,
            bool inverting = false) {
    report_.edits.push_back({kind, path, subject, std::move(detail), inverting});
  }

  void note(const std::string& path, const std::string& text) { report_.notes.push_back(path + ": " + text); }

  void subtree(EditKind kind, const std::string& path, const CriterionNode& root) {
    for_each_node(root, [&](const CriterionNode& n, std::size_t) {
      edit(kind, path, n.criterion_id, std::string(to_string(n.kind)) + " \"" + n.text + "\"");
    });
  }

  void consequence(const std::string& path, const Consequence& d, const Consequence& r) {
    const auto differs = [&](const char* what, const std::string& dv, const std::string& rv) {
      if (dv != rv) edit(EditKind::ChangedConsequence, path, r.consequence_id, std::string(what) + ": '" + dv + "' vs '" + rv + "'");
    };
    differs("consequence_id", d.consequence_id, r.consequence_id);
    differs("text", d.text, r.text);
    const auto action = [](const ActionSpec& a) { return a.action_id + " \"" + a.label + "\""; };
    differs("apply_action", action(d.apply_action), action(r.apply_action));
    differs("reject_action", action(d.reject_action), action(r.reject_action));
    differs("undetermined_action", action(d.undetermined_action), action(r.undetermined_action));
  }

  void node(const std::string& path, const CriterionNode& d, const CriterionNode& r) {
    if (d.criterion_id != r.criterion_id || d.text != r.text) {
      std::string detail;
      if (d.criterion_id != r.criterion_id) detail += "id '" + d.criterion_id + "' vs '" + r.criterion_id + "'";
      if (d.text != r.text) {
        if (!detail.empty()) detail += "; ";
        detail += "text \"" + d.text + "\" vs \"" + r.text + "\"";
      }
      edit(EditKind::RenamedCriterion, path, r.criterion_id, detail);
    }
    if (d.kind != r.kind) {
      const bool flips_connective = (d.kind == CriterionKind::All && r.kind == CriterionKind::Any) ||
                                    (d.kind == CriterionKind::Any && r.kind == CriterionKind::All);
      const bool inverting = flips_connective || d.kind == CriterionKind::Not || r.kind == CriterionKind::Not;
      edit(EditKind::ChangedCombinator, path, r.criterion_id,
           std::string(to_string(d.kind)) + " where the reference has " + std::string(to_string(r.kind)), inverting);
    }
    if (d.is_leaf() && r.is_leaf()) leaf_notes(path, d, r);

    auto aligned = align(
        d.children, r.children, [](const CriterionNode& n) { return n.criterion_id; },
        [](const CriterionNode& n) { return n.text; });
    for (auto [dc, rc] : aligned.pairs) node(path, *dc, *rc);
    for (const auto* dc : aligned.only_draft) subtree(EditKind::AddedCriterion, path, *dc);
    for (const auto* rc : aligned.only_reference) subtree(EditKind::RemovedCriterion, path, *rc);
  }

  void leaf_notes(const std::string& path, const CriterionNode& d, const CriterionNode& r) {
    const std::string& id = r.criterion_id;
    if (d.prior != r.prior) note(path, "prior of '" + id + "' differs");
    auto aligned = align(
        d.evidence_specs, r.evidence_specs, [](const EvidenceSpec& e) { return e.evidence_id; },
        [](const EvidenceSpec& e) { return e.description; });
    for (auto [de, re] : aligned.pairs) {
      if (de->likelihood != re->likelihood) {
        note(path, "likelihood of '" + re->evidence_id + "' under '" + id + "' is " + describe_row(de->likelihood) +
                       " in the draft, " + describe_row(re->likelihood) + " in the reference");
      }
      if (de->accepted_sources != re->accepted_sources) {
        note(path, "accepted sources of '" + re->evidence_id + "' under '" + id + "' differ");
      }
    }
    for (const auto* de : aligned.only_draft) note(path, "evidence '" + de->evidence_id + "' on '" + id + "' only in the draft");
    for (const auto* re : aligned.only_reference) {
      note(path, "evidence '" + re->evidence_id + "' on '" + id + "' missing from the draft");
    }
  }

  ReviewReport& report_;
};

}  // namespace

ReviewReport review_report(const JurisdictionPack& draft, const JurisdictionPack& reference,
                           const ReviewThresholds& thresholds) {
  ReviewReport report;
  Differ(report).paths(draft, reference);
  const std::size_t n = report.edit_count();
  if (n <= thresholds.equivalent_max) {
    report.verdict = Equivalence::Equivalent;
  } else if (n <= thresholds.minor_max) {
    report.verdict = Equivalence::MinorEdits;
  } else {
    report.verdict = Equivalence::MajorEdits;
  }
  return report;
}

std::string format_review(const ReviewReport& report) {
  std::ostringstream out;
  out << "verdict: " << to_string(report.verdict) << " (" << report.edit_count() << " structural edit"
      << (report.edit_count() == 1 ? "" : "s") << ")\n";
  for (const auto& e : report.edits) {
    out << "  " << to_string(e.kind) << " " << e.path_id << "/" << e.subject << ": " << e.detail;
    if (e.semantics_inverting) out << " [semantics-inverting]";
    out << "\n";
  }
  if (!report.notes.empty()) {
    out << "notes:\n";
    for (const auto& n : report.notes) out << "  " << n << "\n";
  }
  return out.str();
}

}  // namespace lexpath
