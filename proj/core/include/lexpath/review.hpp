#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/rule_ir.hpp"

namespace lexpath {

enum class EditKind {
  AddedPath,
  RemovedPath,
  AddedCriterion,
  RemovedCriterion,
  RenamedCriterion,
  ChangedCombinator,
  ChangedConsequence,
};

std::string_view to_string(EditKind kind) noexcept;

struct StructuralEdit {
  EditKind kind;
  std::string path_id;
  /// criterion or consequence id the edit applies to (reference side when both exist)
  std::string subject;
  std::string detail;
  /// ALL <-> ANY or NOT inserted/removed: flips the meaning of the rule.
  bool semantics_inverting = false;
};

enum class Equivalence { Equivalent, MinorEdits, MajorEdits };

std::string_view to_string(Equivalence verdict) noexcept;

struct ReviewThresholds {
  std::size_t equivalent_max = 0;
  std::size_t minor_max = 3;
};

struct ReviewReport {
  std::vector<StructuralEdit> edits;
  /// Non-structural differences (priors, likelihoods, evidence wiring).
  std::vector<std::string> notes;
  Equivalence verdict = Equivalence::Equivalent;

  std::size_t edit_count() const noexcept { return edits.size(); }
};

/// Node-aligned diff of `draft` against `reference`. Children are aligned by
/// criterion id, then by identical text (a rename). Every node of an added or
/// removed subtree counts as one edit.
ReviewReport review_report(const JurisdictionPack& draft, const JurisdictionPack& reference,
                           const ReviewThresholds& thresholds = {});

std::string format_review(const ReviewReport& report);

}  // namespace lexpath
