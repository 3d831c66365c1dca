#pragma once

// Decision-path intermediate representation.
//
// A JurisdictionPack bundles the decision paths compiled from one statute.
// Each path is a tree of criteria (Cr) ending in a single consequence (Cs);
// leaf criteria carry a prior and the evidence items (E) that bear on them,
// each with a likelihood row P(E|Cr), P(E|not Cr) stored as pseudo-counts.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/diagnostic.hpp"
#include "lexpath/timestamp.hpp"

namespace lexpath {

enum class CriterionKind { Leaf, All, Any, Not };

enum class SourceType { Sensor, Geospatial, Document, Manual };

std::string_view to_string(CriterionKind kind) noexcept;
std::optional<CriterionKind> parse_criterion_kind(std::string_view text) noexcept;
std::string_view to_string(SourceType type) noexcept;
std::optional<SourceType> parse_source_type(std::string_view text) noexcept;

/// Likelihood row for one evidence item, stored as pseudo-counts so that
/// count learning is exact. Derived probabilities renormalise across the two
/// hypothesis states.
struct LikelihoodRow {
  double count_given_cr = 0.0;
  double count_given_not_cr = 0.0;

  double total() const noexcept { return count_given_cr + count_given_not_cr; }
  double p_cr() const noexcept { return count_given_cr / total(); }
  double p_not_cr() const noexcept { return 1.0 - p_cr(); }
  bool degenerate() const noexcept;

  /// Pseudo-counts (p * strength, (1 - p) * strength).
  static LikelihoodRow from_probability(double p_cr, double strength = 1.0);

  bool operator==(const LikelihoodRow&) const = default;
};

struct Prior {
  double p_cr = 0.5;
  double p_not_cr = 0.5;

  bool operator==(const Prior&) const = default;
};

struct EvidenceSpec {
  std::string evidence_id;
  std::string description;
  /// Empty means any source is accepted.
  std::vector<SourceType> accepted_sources;
  LikelihoodRow likelihood;

  bool accepts(SourceType type) const noexcept;
  bool operator==(const EvidenceSpec&) const = default;
};

struct CriterionNode {
  std::string criterion_id;
  std::string text;
  CriterionKind kind = CriterionKind::Leaf;
  std::vector<CriterionNode> children;
  std::vector<EvidenceSpec> evidence_specs;
  std::optional<Prior> prior;

  bool is_leaf() const noexcept { return kind == CriterionKind::Leaf; }
  const EvidenceSpec* find_evidence(std::string_view evidence_id) const noexcept;
  bool operator==(const CriterionNode&) const = default;
};

struct ActionSpec {
  std::string action_id;
  std::string label;

  bool operator==(const ActionSpec&) const = default;
};

struct Consequence {
  std::string consequence_id;
  std::string text;
  ActionSpec apply_action;
  ActionSpec reject_action;
  ActionSpec undetermined_action;

  bool operator==(const Consequence&) const = default;
};

/// Half-open byte range [begin, end) into the statute text.
struct SourceSpan {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  bool operator==(const SourceSpan&) const = default;
};

struct DecisionPath {
  std::string path_id;
  Consequence consequence;
  CriterionNode root;
  std::vector<SourceSpan> source_spans;

  bool operator==(const DecisionPath&) const = default;
};

struct JurisdictionPack {
  std::string pack_id;
  std::string jurisdiction;
  std::string source_citation;
  std::string version;
  std::vector<DecisionPath> paths;
  Timestamp created_at{};

  const DecisionPath* find_path(std::string_view path_id) const noexcept;
  bool operator==(const JurisdictionPack&) const = default;
};

/// Deepest criterion nesting accepted by the validator and both parsers.
inline constexpr std::size_t kMaxCriterionDepth = 64;

/// Checks every IR invariant. Diagnostics carry a JSON pointer into the
/// canonical serialization; an empty result means the pack is well formed.
std::vector<Diagnostic> validate_pack(const JurisdictionPack& pack);

/// Pack ids double as directory names in a pack store.
bool is_valid_pack_id(std::string_view pack_id) noexcept;

/// Pre-order traversal; the callback receives each node and its depth (root = 0).
void for_each_node(const CriterionNode& root,
                   const std::function<void(const CriterionNode&, std::size_t)>& visit);

const CriterionNode* find_criterion(const CriterionNode& root, std::string_view criterion_id) noexcept;
CriterionNode* find_criterion(CriterionNode& root, std::string_view criterion_id) noexcept;

/// Number of nodes in the subtree rooted at `node`.
std::size_t subtree_size(const CriterionNode& node) noexcept;

}  // namespace lexpath
