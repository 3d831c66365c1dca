#include "lexpath/inference.hpp"

#include <charconv>
#include <cmath>

#include "lexpath/error.hpp"

namespace lexpath {

std::string_view to_string(Status status) noexcept {
  switch (status) {
    case Status::Established: return "ESTABLISHED";
    case Status::Rejected: return "REJECTED";
    case Status::Undetermined: return "UNDETERMINED";
  }
  return "UNDETERMINED";
}

std::optional<Status> parse_status(std::string_view text) noexcept {
  if (text == "ESTABLISHED") return Status::Established;
  if (text == "REJECTED") return Status::Rejected;
  if (text == "UNDETERMINED") return Status::Undetermined;
  return std::nullopt;
}

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

std::optional<double> number(std::string_view text) {
  double v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool valid_tau(double tau) { return std::isfinite(tau) && tau >= 0.5 && tau < 1.0; }
bool valid_epsilon(double eps) { return std::isfinite(eps) && eps >= 0.0 && eps < 0.5; }

}  // namespace

// tau below 0.5 (or eps at/above 0.5) would let one posterior be both
// established and rejected.
DecisionPolicy DecisionPolicy::threshold(double tau) {
  if (!valid_tau(tau)) throw Error(ErrorCode::InvalidArgument, "threshold tau must lie in [0.5, 1)");
  return {PolicyKind::Threshold, tau, 1e-9};
}

DecisionPolicy DecisionPolicy::certainty(double epsilon) {
  if (!valid_epsilon(epsilon)) throw Error(ErrorCode::InvalidArgument, "certainty epsilon must lie in [0, 0.5)");
  return {PolicyKind::Certainty, 0.5, epsilon};
}

std::optional<DecisionPolicy> DecisionPolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const std::optional<std::string_view> arg =
      colon == std::string_view::npos ? std::nullopt : std::optional(text.substr(colon + 1));
  if (name == "argmax") {
    if (arg) return std::nullopt;
    return argmax();
  }
  if (name == "threshold") {
    const double tau = arg ? number(*arg).value_or(-1.0) : 0.5;
    if (!valid_tau(tau)) return std::nullopt;
    return threshold(tau);
  }
  if (name == "certainty") {
    const double eps = arg ? number(*arg).value_or(-1.0) : 1e-9;
    if (!valid_epsilon(eps)) return std::nullopt;
    return certainty(eps);
  }
  return std::nullopt;
}

std::string DecisionPolicy::to_string() const {
  switch (kind) {
    case PolicyKind::Argmax: return "argmax";
    case PolicyKind::Threshold: return "threshold:" + shortest(tau);
    case PolicyKind::Certainty: return "certainty:" + shortest(epsilon);
  }
  return "argmax";
}

Status DecisionPolicy::classify(const PosteriorState& posterior) const noexcept {
  const double p = posterior.p_cr;
  switch (kind) {
    case PolicyKind::Argmax:
      if (p > posterior.p_not_cr) return Status::Established;
      if (p < posterior.p_not_cr) return Status::Rejected;
      return Status::Undetermined;
    case PolicyKind::Threshold:
      if (p > tau) return Status::Established;
      if (p < 1.0 - tau) return Status::Rejected;
      return Status::Undetermined;
    case PolicyKind::Certainty:
      if (p >= 1.0 - epsilon) return Status::Established;
      if (p <= epsilon) return Status::Rejected;
      return Status::Undetermined;
  }
  return Status::Undetermined;
}

PosteriorState bayes_update(const PosteriorState& state, const LikelihoodRow& row) {
  if (row.degenerate()) throw Error(ErrorCode::DegenerateUpdate, "likelihood row has zero total count");
  const double joint_cr = row.p_cr() * state.p_cr;
  const double joint_not = row.p_not_cr() * state.p_not_cr;
  const double z = joint_cr + joint_not;
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw Error(ErrorCode::DegenerateUpdate, "evidence has zero probability under the current belief");
  }
  const double p = joint_cr / z;
  return {p, 1.0 - p, state.update_count + 1};
}

LikelihoodRow learn_count(const LikelihoodRow& row, Observed observed, double weight) {
  if (!std::isfinite(weight) || !(weight > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "learning weight must be positive and finite");
  }
  LikelihoodRow out = row;
  (observed == Observed::Cr ? out.count_given_cr : out.count_given_not_cr) += weight;
  return out;
}

LeafEvaluation evaluate_leaf_steps(const CriterionNode& node, std::span<const EvidenceRecord> observations,
                                   const DecisionPolicy& policy) {
  if (!node.is_leaf() || !node.prior) {
    throw Error(ErrorCode::InvalidArgument, "criterion '" + node.criterion_id + "' is not a LEAF with a prior");
  }
  LeafEvaluation out;
  out.prior = PosteriorState::from_prior(*node.prior);
  PosteriorState state = out.prior;
  for (const auto& record : observations) {
    const auto* spec = node.find_evidence(record.evidence_id);
    if (!spec) {
      throw Error(ErrorCode::UnknownEvidence, "evidence '" + record.evidence_id + "' is not declared on criterion '" +
                                                  node.criterion_id + "'");
    }
    state = bayes_update(state, spec->likelihood);
    out.steps.push_back({spec, &record, state});
  }
  out.status = {policy.classify(state), state, policy};
  return out;
}

CriterionStatus evaluate_leaf(const CriterionNode& node, std::span<const EvidenceRecord> observations,
                              const DecisionPolicy& policy) {
  return evaluate_leaf_steps(node, observations, policy).status;
}

CriterionStatus evaluate_tree(const CriterionNode& node, const StatusMap& leaf_statuses,
                              const CompositeVisitor& visit) {
  if (node.is_leaf()) {
    auto it = leaf_statuses.find(node.criterion_id);
    if (it == leaf_statuses.end()) {
      throw Error(ErrorCode::MissingLeafStatus, "no status for leaf '" + node.criterion_id + "'");
    }
    return it->second;
  }

  std::size_t established = 0;
  std::size_t rejected = 0;
  DecisionPolicy policy;
  for (const auto& child : node.children) {
    const auto s = evaluate_tree(child, leaf_statuses, visit);
    policy = s.policy_used;
    established += s.status == Status::Established;
    rejected += s.status == Status::Rejected;
  }
  const std::size_t n = node.children.size();

  Status status = Status::Undetermined;
  switch (node.kind) {
    case CriterionKind::All:
      if (rejected > 0) {
        status = Status::Rejected;
      } else if (established == n) {
        status = Status::Established;
      }
      break;
    case CriterionKind::Any:
      if (established > 0) {
        status = Status::Established;
      } else if (rejected == n) {
        status = Status::Rejected;
      }
      break;
    case CriterionKind::Not:
      if (established > 0) {
        status = Status::Rejected;
      } else if (rejected > 0) {
        status = Status::Established;
      }
      break;
    case CriterionKind::Leaf:
      break;
  }
  CriterionStatus out{status, std::nullopt, policy};
  if (visit) visit(node, out);
  return out;
}

Decision deduce(const DecisionPath& path, const CriterionStatus& root_status) {
  Decision d;
  d.path_id = path.path_id;
  d.consequence_id = path.consequence.consequence_id;
  d.root_status = root_status;
  switch (root_status.status) {
    case Status::Established: d.action = path.consequence.apply_action; break;
    case Status::Rejected: d.action = path.consequence.reject_action; break;
    case Status::Undetermined: d.action = path.consequence.undetermined_action; break;
  }
  return d;
}

}  // namespace lexpath
