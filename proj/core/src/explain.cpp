// Human-readable renderings of a verified trace.

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "lexpath/error.hpp"
#include "lexpath/trace.hpp"

namespace lexpath {

namespace {

std::optional<double> parse_number(const std::string* text) {
  if (!text) return std::nullopt;
  double v = 0;
  auto [end, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc{} || end != text->data() + text->size()) return std::nullopt;
  return v;
}

std::string fixed(double v, int digits) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return ec == std::errc{} ? std::string(buf, end) : std::string("?");
}

std::string dp4(const std::string* text) {
  auto v = parse_number(text);
  return v ? fixed(*v, 4) : (text ? *text : std::string("?"));
}

std::string percent(double p) { return fixed(p * 100.0, 2) + "%"; }

std::string field(const std::string* text) { return text ? *text : std::string("?"); }

std::vector<std::string> split_ids(const std::string& joined) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= joined.size() && !joined.empty()) {
    const auto comma = joined.find(',', start);
    out.push_back(joined.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Step {
  std::string evidence_id;
  std::string description;
  std::string source;
  double p_cr = 0;
};

struct Node {
  std::string id;
  std::string text;
  std::string kind = "LEAF";
  std::vector<std::string> children;
  std::string status;
  std::optional<double> prior;
  std::optional<double> p_cr;
  std::vector<Step> steps;
};

// Rebuilds the criterion tree and per-leaf belief trajectories from events.
class Model {
 public:
  explicit Model(const Trace& trace) {
    std::string pending_source;
    std::string pending_description;
    for (const auto& e : trace.events()) {
      const std::string* id = e.subject("criterion_id");
      switch (e.kind) {
        case EventKind::PriorLoaded: {
          auto& n = node(field(id));
          n.text = field(e.subject("criterion_text"));
          n.prior = parse_number(e.value("p_cr"));
          break;
        }
        case EventKind::EvidenceApplied:
          pending_source = field(e.subject("source_kind")) + " " + field(e.subject("source_id"));
          pending_description = field(e.subject("evidence_description"));
          break;
        case EventKind::Posterior: {
          auto p = parse_number(e.value("p_cr"));
          node(field(id)).steps.push_back(
              {field(e.subject("evidence_id")), pending_description, pending_source, p.value_or(0.0)});
          break;
        }
        case EventKind::LeafStatus: {
          auto& n = node(field(id));
          n.text = field(e.subject("criterion_text"));
          n.status = field(e.subject("status"));
          n.p_cr = parse_number(e.value("p_cr"));
          break;
        }
        case EventKind::TreeStatus: {
          auto& n = node(field(id));
          n.text = field(e.subject("criterion_text"));
          n.kind = field(e.subject("kind"));
          n.children = split_ids(field(e.subject("children")));
          n.status = field(e.subject("status"));
          break;
        }
        case EventKind::Deduction:
          root = field(id);
          consequence_text = field(e.subject("consequence_text"));
          break;
        case EventKind::SessionStart:
        case EventKind::Decision:
        case EventKind::Error:
          break;
      }
    }
  }

  const Node* find(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  /// Probability of the status the leaf actually took.
  static double confidence(const Node& leaf) {
    const double p = leaf.p_cr.value_or(0.5);
    return leaf.status == "REJECTED" ? 1.0 - p : p;
  }

  // For a node whose status is decided, the leaf that carries the outcome:
  // the weakest link when every child is needed, the strongest child when one suffices.
  const Node* decisive(const std::string& id, std::size_t depth = 0) const {
    const Node* n = find(id);
    if (!n || n->kind == "LEAF" || depth > 256) return n;
    const bool all_needed = (n->kind == "ALL" && n->status == "ESTABLISHED") ||
                            (n->kind == "ANY" && n->status == "REJECTED");
    const Node* best = nullptr;
    for (const auto& child_id : n->children) {
      const Node* child = find(child_id);
      if (!child) continue;
      if (n->kind != "NOT" && child->status != n->status) continue;
      const Node* leaf = decisive(child_id, depth + 1);
      if (!leaf || leaf->kind != "LEAF") continue;
      if (!best || (all_needed ? confidence(*leaf) < confidence(*best) : confidence(*leaf) > confidence(*best))) {
        best = leaf;
      }
    }
    return best;
  }

  void leaves_under(const std::string& id, std::vector<const Node*>& out, std::size_t depth = 0) const {
    const Node* n = find(id);
    if (!n || depth > 256) return;
    if (n->kind == "LEAF") {
      out.push_back(n);
      return;
    }
    for (const auto& c : n->children) leaves_under(c, out, depth + 1);
  }

  std::string root;
  std::string consequence_text;

 private:
  Node& node(const std::string& id) {
    auto& n = nodes_[id];
    n.id = id;
    return n;
  }

  std::map<std::string, Node> nodes_;
};

std::string quoted(const Node& n) { return "\"" + n.text + "\" (" + n.id + ")"; }

void describe_leaf(std::ostream& out, const Node& leaf) {
  out << "Decisive criterion: " << quoted(leaf) << ", " << leaf.status << " with a "
      << percent(leaf.p_cr.value_or(0.0)) << " probability that it applies.";
  if (leaf.steps.empty()) {
    out << " No evidence was received for it; the prior of " << percent(leaf.prior.value_or(0.0)) << " stood.";
    return;
  }
  out << " Belief moved " << percent(leaf.prior.value_or(0.0));
  for (const auto& s : leaf.steps) out << " -> " << percent(s.p_cr);
  out << " as evidence arrived:";
  for (std::size_t i = 0; i < leaf.steps.size(); ++i) {
    const auto& s = leaf.steps[i];
    out << (i ? ";" : "") << " " << s.evidence_id;
    if (!s.description.empty()) out << " (" << s.description << ")";
    out << " from " << s.source << " gave " << percent(s.p_cr);
  }
  out << ".";
  std::set<std::string> sources;
  for (const auto& s : leaf.steps) sources.insert(s.source);
  out << " Evidence sources used:";
  bool first = true;
  for (const auto& s : sources) {
    out << (first ? " " : ", ") << s;
    first = false;
  }
  out << ".";
}

std::string render_operator(const Trace& trace) {
  const Model model(trace);
  std::ostringstream out;
  bool any = false;
  for (const auto& e : trace.events()) {
    if (e.kind == EventKind::Error) {
      if (any) out << "\n";
      out << "The session stopped with " << field(e.subject("code")) << ": " << field(e.subject("message"))
          << ". No decision was taken.\n";
      any = true;
      continue;
    }
    if (e.kind != EventKind::Decision) continue;
    if (any) out << "\n";
    any = true;
    const std::string status = field(e.subject("status"));
    out << "Action: " << field(e.subject("action_id"));
    if (const auto* label = e.subject("action_label"); label && !label->empty()) out << " (" << *label << ")";
    out << ". The consequence";
    if (!model.consequence_text.empty()) out << " \"" << model.consequence_text << "\"";
    out << " [" << field(e.subject("consequence_id")) << "] is " << status << " under policy "
        << trace.header().policy << ".";

    if (status == "UNDETERMINED") {
      std::vector<const Node*> leaves;
      model.leaves_under(model.root, leaves);
      std::vector<const Node*> lacking;
      std::vector<const Node*> unresolved;
      for (const auto* l : leaves) {
        if (l->steps.empty()) lacking.push_back(l);
        else if (l->status == "UNDETERMINED") unresolved.push_back(l);
      }
      if (!lacking.empty()) {
        out << " Criteria lacking evidence:";
        for (std::size_t i = 0; i < lacking.size(); ++i) out << (i ? ", " : " ") << quoted(*lacking[i]);
        out << ".";
      }
      if (!unresolved.empty()) {
        out << " Criteria left undetermined by their evidence:";
        for (std::size_t i = 0; i < unresolved.size(); ++i) {
          out << (i ? ", " : " ") << quoted(*unresolved[i]) << " at " << percent(unresolved[i]->p_cr.value_or(0.0));
        }
        out << ".";
      }
      out << "\n";
      continue;
    }

    const Node* leaf = model.decisive(model.root);
    if (leaf) {
      out << " ";
      describe_leaf(out, *leaf);
    }
    out << "\n";
  }
  if (!any) out << "The trace holds no decision.\n";
  return out.str();
}

std::string render_event(const TraceEvent& e) {
  const auto s = [&](const char* key) { return field(e.subject(key)); };
  const auto v = [&](const char* key) { return dp4(e.value(key)); };
  std::ostringstream out;
  out << to_string(e.kind) << " ";
  switch (e.kind) {
    case EventKind::SessionStart:
      out << "pack " << s("pack_id") << "@" << s("version") << ", path " << s("path_id") << ", policy "
          << s("policy") << "; " << field(e.value("evidence_count")) << " observation(s) applied";
      if (const auto* excluded = e.value("excluded_count")) out << ", " << *excluded << " excluded";
      break;
    case EventKind::PriorLoaded:
      out << s("criterion_id") << ": prior P(Cr)=" << v("p_cr") << " P(not Cr)=" << v("p_not_cr");
      break;
    case EventKind::EvidenceApplied:
      out << s("evidence_id") << " -> " << s("criterion_id") << " from " << s("source_kind") << " "
          << s("source_id") << " (record " << s("record_id") << "): counts " << v("count_given_cr") << "/"
          << v("count_given_not_cr") << ", likelihood P(E|Cr)=" << v("p_e_given_cr")
          << " P(E|not Cr)=" << v("p_e_given_not_cr");
      break;
    case EventKind::Posterior:
      out << s("criterion_id") << " after " << s("evidence_id") << ": posterior P(Cr)=" << v("p_cr")
          << " P(not Cr)=" << v("p_not_cr") << " (update " << field(e.value("update_count")) << ")";
      break;
    case EventKind::LeafStatus:
      out << s("criterion_id") << ": " << s("status") << " at P(Cr)=" << v("p_cr") << " under " << s("policy");
      break;
    case EventKind::TreeStatus:
      out << s("criterion_id") << " = " << s("kind") << "(" << s("children") << "): " << s("status");
      break;
    case EventKind::Deduction:
      out << s("inference") << ": " << s("criterion_id") << " is " << s("root_status") << ", consequence "
          << s("consequence_id");
      break;
    case EventKind::Decision:
      out << "path " << s("path_id") << ": " << s("status") << " -> action " << s("action_id");
      break;
    case EventKind::Error:
      out << s("code") << ": " << s("message");
      break;
  }
  out << " @ " << format_timestamp(e.timestamp) << " [" << e.hash.substr(0, 12) << "]";
  return out.str();
}

std::string render_auditor(const Trace& trace) {
  const auto& h = trace.header();
  std::ostringstream out;
  out << "Trace " << h.trace_id << ": pack " << h.pack_id << "@" << h.version << ", path " << h.path_id
      << ", policy " << h.policy << "\n";
  std::size_t i = 0;
  for (const auto& e : trace.events()) out << ++i << ". " << render_event(e) << "\n";
  out << "Head hash " << trace.head_hash() << " (" << trace.size() << " events, chain verified)\n";
  return out.str();
}

}  // namespace

std::string render_explanation(const Trace& trace, Audience audience) {
  trace.verify();
  return audience == Audience::Operator ? render_operator(trace) : render_auditor(trace);
}

}  // namespace lexpath
