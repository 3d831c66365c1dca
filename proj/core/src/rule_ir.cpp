#include "lexpath/rule_ir.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lexpath/version.hpp"

namespace lexpath {

std::string_view to_string(CriterionKind kind) noexcept {
  switch (kind) {
    case CriterionKind::Leaf: return "LEAF";
    case CriterionKind::All: return "ALL";
    case CriterionKind::Any: return "ANY";
    case CriterionKind::Not: return "NOT";
  }
  return "LEAF";
}

std::optional<CriterionKind> parse_criterion_kind(std::string_view text) noexcept {
  if (text == "LEAF") return CriterionKind::Leaf;
  if (text == "ALL") return CriterionKind::All;
  if (text == "ANY") return CriterionKind::Any;
  if (text == "NOT") return CriterionKind::Not;
  return std::nullopt;
}

std::string_view to_string(SourceType type) noexcept {
  switch (type) {
    case SourceType::Sensor: return "SENSOR";
    case SourceType::Geospatial: return "GEOSPATIAL";
    case SourceType::Document: return "DOCUMENT";
    case SourceType::Manual: return "MANUAL";
  }
  return "MANUAL";
}

std::optional<SourceType> parse_source_type(std::string_view text) noexcept {
  if (text == "SENSOR") return SourceType::Sensor;
  if (text == "GEOSPATIAL") return SourceType::Geospatial;
  if (text == "DOCUMENT") return SourceType::Document;
  if (text == "MANUAL") return SourceType::Manual;
  return std::nullopt;
}

bool LikelihoodRow::degenerate() const noexcept {
  return !(total() > 0.0);
}

LikelihoodRow LikelihoodRow::from_probability(double p_cr, double strength) {
  return {p_cr * strength, (1.0 - p_cr) * strength};
}

bool EvidenceSpec::accepts(SourceType type) const noexcept {
  return accepted_sources.empty() ||
         std::find(accepted_sources.begin(), accepted_sources.end(), type) != accepted_sources.end();
}

const EvidenceSpec* CriterionNode::find_evidence(std::string_view evidence_id) const noexcept {
  for (const auto& spec : evidence_specs) {
    if (spec.evidence_id == evidence_id) return &spec;
  }
  return nullptr;
}

const DecisionPath* JurisdictionPack::find_path(std::string_view path_id) const noexcept {
  for (const auto& path : paths) {
    if (path.path_id == path_id) return &path;
  }
  return nullptr;
}

bool is_valid_pack_id(std::string_view pack_id) noexcept {
  if (pack_id.empty() || pack_id == "." || pack_id == ".." || pack_id.size() > 128) return false;
  return std::all_of(pack_id.begin(), pack_id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
           c == '_' || c == '-';
  });
}

void for_each_node(const CriterionNode& root,
                   const std::function<void(const CriterionNode&, std::size_t)>& visit) {
  struct Frame {
    const CriterionNode* node;
    std::size_t depth;
  };
  std::vector<Frame> stack{{&root, 0}};
  while (!stack.empty()) {
    const Frame top = stack.back();
    stack.pop_back();
    visit(*top.node, top.depth);
    for (auto it = top.node->children.rbegin(); it != top.node->children.rend(); ++it) {
      stack.push_back({&*it, top.depth + 1});
    }
  }
}

const CriterionNode* find_criterion(const CriterionNode& root, std::string_view criterion_id) noexcept {
  if (root.criterion_id == criterion_id) return &root;
  for (const auto& child : root.children) {
    if (const auto* found = find_criterion(child, criterion_id)) return found;
  }
  return nullptr;
}

CriterionNode* find_criterion(CriterionNode& root, std::string_view criterion_id) noexcept {
  return const_cast<CriterionNode*>(find_criterion(std::as_const(root), criterion_id));
}

std::size_t subtree_size(const CriterionNode& node) noexcept {
  std::size_t n = 1;
  for (const auto& child : node.children) n += subtree_size(child);
  return n;
}

namespace {

class Validator {
 public:
  std::vector<Diagnostic> run(const JurisdictionPack& pack) {
    if (pack.pack_id.empty()) {
      error("pack_id must not be empty", "/pack_id");
    } else if (!is_valid_pack_id(pack.pack_id)) {
      error("pack_id '" + pack.pack_id + "' must use only letters, digits, '.', '_' and '-'", "/pack_id");
    }
    if (!Version::parse(pack.version)) {
      error("version '" + pack.version + "' is not of the form MAJOR.MINOR.PATCH", "/version");
    }
    if (pack.paths.empty()) error("no paths declared", "/paths");

    std::set<std::string, std::less<>> path_ids;
    for (std::size_t i = 0; i < pack.paths.size(); ++i) {
      const auto& path = pack.paths[i];
      const std::string base = "/paths/" + std::to_string(i);
      if (path.path_id.empty()) {
        error("path_id must not be empty", base + "/path_id");
      } else if (!path_ids.insert(path.path_id).second) {
        error("duplicate path_id '" + path.path_id + "'", base + "/path_id");
      }
      check_consequence(path.consequence, base + "/consequence");
      for (std::size_t s = 0; s < path.source_spans.size(); ++s) {
        if (path.source_spans[s].begin > path.source_spans[s].end) {
          error("source span begin exceeds end", base + "/source_spans/" + std::to_string(s));
        }
      }
      check_node(path.root, base + "/root", 0);
    }
    return std::move(diagnostics_);
  }

 private:
  void error(std::string message, std::string pointer) {
    diagnostics_.push_back(make_error(std::move(message), Location{0, 0, std::move(pointer)}));
  }

  void check_action(const ActionSpec& action, const std::string& pointer) {
    if (action.action_id.empty()) error("action_id must not be empty", pointer + "/action_id");
  }

  void check_consequence(const Consequence& consequence, const std::string& pointer) {
    if (consequence.consequence_id.empty()) {
      error("consequence_id must not be empty", pointer + "/consequence_id");
    }
    check_action(consequence.apply_action, pointer + "/apply_action");
    check_action(consequence.reject_action, pointer + "/reject_action");
    check_action(consequence.undetermined_action, pointer + "/undetermined_action");
  }

  void check_node(const CriterionNode& node, const std::string& pointer, std::size_t depth) {
    if (depth >= kMaxCriterionDepth) {
      error("criterion nesting exceeds " + std::to_string(kMaxCriterionDepth) + " levels", pointer);
      return;
    }
    if (node.criterion_id.empty()) {
      error("criterion_id must not be empty", pointer + "/criterion_id");
    } else if (!criterion_ids_.insert(node.criterion_id).second) {
      error("duplicate criterion_id '" + node.criterion_id + "'", pointer + "/criterion_id");
    }

    const std::size_t n = node.children.size();
    switch (node.kind) {
      case CriterionKind::Leaf:
        if (n != 0) error("LEAF must have no children", pointer + "/children");
        break;
      case CriterionKind::All:
      case CriterionKind::Any:
        if (n < 2) {
          error(std::string(to_string(node.kind)) + " requires at least 2 children (has " + std::to_string(n) + ")",
                pointer + "/children");
        }
        break;
      case CriterionKind::Not:
        if (n != 1) {
          error("NOT requires exactly 1 child (has " + std::to_string(n) + ")", pointer + "/children");
        }
        break;
    }

    if (node.is_leaf()) {
      if (!node.prior) {
        error("LEAF criterion '" + node.criterion_id + "' has no prior", pointer + "/prior");
      } else {
        check_prior(*node.prior, pointer + "/prior");
      }
    } else {
      if (node.prior) error("only LEAF criteria carry a prior", pointer + "/prior");
      if (!node.evidence_specs.empty()) {
        error("only LEAF criteria carry evidence specs", pointer + "/evidence_specs");
      }
    }

    for (std::size_t i = 0; i < node.evidence_specs.size(); ++i) {
      check_evidence(node.evidence_specs[i], pointer + "/evidence_specs/" + std::to_string(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
      check_node(node.children[i], pointer + "/children/" + std::to_string(i), depth + 1);
    }
  }

  void check_prior(const Prior& prior, const std::string& pointer) {
    const auto in_unit = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
    if (!in_unit(prior.p_cr) || !in_unit(prior.p_not_cr)) {
      error("prior components must lie in [0, 1]", pointer);
    } else if (std::abs(prior.p_cr + prior.p_not_cr - 1.0) > 1e-9) {
      error("prior components must sum to 1", pointer);
    }
  }

  void check_evidence(const EvidenceSpec& spec, const std::string& pointer) {
    if (spec.evidence_id.empty()) {
      error("evidence_id must not be empty", pointer + "/evidence_id");
    } else if (!evidence_ids_.insert(spec.evidence_id).second) {
      error("duplicate evidence_id '" + spec.evidence_id + "'", pointer + "/evidence_id");
    }
    const auto& row = spec.likelihood;
    const auto valid = [](double c) { return std::isfinite(c) && c >= 0.0; };
    if (!valid(row.count_given_cr) || !valid(row.count_given_not_cr)) {
      error("likelihood counts must be finite and non-negative", pointer + "/likelihood");
    } else if (row.degenerate()) {
      error("degenerate likelihood row", pointer + "/likelihood");
    }
  }

  std::vector<Diagnostic> diagnostics_;
  std::set<std::string, std::less<>> criterion_ids_;
  std::set<std::string, std::less<>> evidence_ids_;
};

}  // namespace

std::vector<Diagnostic> validate_pack(const JurisdictionPack& pack) {
  return Validator{}.run(pack);
}

}  // namespace lexpath
