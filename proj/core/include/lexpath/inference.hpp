#pragma once

// Compute stage: per-criterion Bayesian updating, tri-state tree logic, and
// modus ponens deduction of the path's consequence.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexpath/evidence.hpp"
#include "lexpath/rule_ir.hpp"

namespace lexpath {

/// Belief over a criterion: P(Cr) and P(not Cr).
struct PosteriorState {
  double p_cr = 0.5;
  double p_not_cr = 0.5;
  std::uint64_t update_count = 0;

  static PosteriorState from_prior(const Prior& prior) noexcept {
    return {prior.p_cr, prior.p_not_cr, 0};
  }
  bool operator==(const PosteriorState&) const = default;
};

enum class Status { Established, Rejected, Undetermined };

std::string_view to_string(Status status) noexcept;
std::optional<Status> parse_status(std::string_view text) noexcept;

enum class PolicyKind { Argmax, Threshold, Certainty };

/// Maps a posterior to a tri-state status.
///   ARGMAX     ESTABLISHED iff p_cr > p_not_cr, REJECTED iff <, else UNDETERMINED.
///   THRESHOLD  ESTABLISHED iff p_cr > tau, REJECTED iff p_cr < 1 - tau.
///   CERTAINTY  ESTABLISHED iff p_cr >= 1 - eps, REJECTED iff p_cr <= eps.
struct DecisionPolicy {
  PolicyKind kind = PolicyKind::Argmax;
  double tau = 0.5;
  double epsilon = 1e-9;

  static DecisionPolicy argmax() noexcept { return {}; }
  static DecisionPolicy threshold(double tau = 0.5);
  static DecisionPolicy certainty(double epsilon = 1e-9);

  /// `argmax`, `threshold`, `threshold:0.7`, `certainty`, `certainty:1e-6`.
  static std::optional<DecisionPolicy> parse(std::string_view text);
  std::string to_string() const;

  Status classify(const PosteriorState& posterior) const noexcept;

  bool operator==(const DecisionPolicy&) const = default;
};

struct CriterionStatus {
  Status status = Status::Undetermined;
  /// Present for leaves only.
  std::optional<PosteriorState> posterior;
  DecisionPolicy policy_used;

  bool operator==(const CriterionStatus&) const = default;
};

enum class Observed { Cr, NotCr };

/// Single Bayes step with the row's renormalised probabilities as
/// likelihoods. Throws DegenerateUpdate when the normaliser is zero.
PosteriorState bayes_update(const PosteriorState& state, const LikelihoodRow& row);

/// Adds `weight` to the pseudo-count of the observed hypothesis state.
/// Throws InvalidArgument for non-positive or non-finite weights.
LikelihoodRow learn_count(const LikelihoodRow& row, Observed observed, double weight = 1.0);

struct EvidenceStep {
  const EvidenceSpec* spec = nullptr;
  const EvidenceRecord* record = nullptr;
  PosteriorState posterior;
};

struct LeafEvaluation {
  PosteriorState prior;
  std::vector<EvidenceStep> steps;
  CriterionStatus status;
};

/// Folds bayes_update over `observations` starting from the node's prior,
/// then classifies. Pointers in the result refer into `node` and `observations`.
/// Throws UnknownEvidence when an observation is not declared on `node`.
LeafEvaluation evaluate_leaf_steps(const CriterionNode& node,
                                   std::span<const EvidenceRecord> observations,
                                   const DecisionPolicy& policy);

CriterionStatus evaluate_leaf(const CriterionNode& node, std::span<const EvidenceRecord> observations,
                              const DecisionPolicy& policy);

using StatusMap = std::map<std::string, CriterionStatus, std::less<>>;

/// Called once per composite node, in post-order, with its computed status.
using CompositeVisitor = std::function<void(const CriterionNode&, const CriterionStatus&)>;

/// Strong-Kleene evaluation of the criterion tree over given leaf statuses.
/// Throws MissingLeafStatus when a leaf under `node` is absent from the map.
CriterionStatus evaluate_tree(const CriterionNode& node, const StatusMap& leaf_statuses,
                              const CompositeVisitor& visit = {});

struct Decision {
  std::string path_id;
  std::string consequence_id;
  ActionSpec action;
  CriterionStatus root_status;
  std::string trace_ref;

  bool operator==(const Decision&) const = default;
};

/// ESTABLISHED -> apply_action, REJECTED -> reject_action,
/// UNDETERMINED -> undetermined_action.
Decision deduce(const DecisionPath& path, const CriterionStatus& root_status);

}  // namespace lexpath
