#include "lexpath/pack_json.hpp"

#include <set>

namespace lexpath {

using nlohmann::json;

namespace {

json action_to_json(const ActionSpec& action) {
  return json{{"action_id", action.action_id}, {"label", action.label}};
}

json node_to_json(const CriterionNode& node) {
  json children = json::array();
  for (const auto& child : node.children) children.push_back(node_to_json(child));
  json specs = json::array();
  for (const auto& spec : node.evidence_specs) {
    json sources = json::array();
    for (auto s : spec.accepted_sources) sources.push_back(std::string(to_string(s)));
    specs.push_back(json{
        {"accepted_sources", std::move(sources)},
        {"description", spec.description},
        {"evidence_id", spec.evidence_id},
        {"likelihood",
         json{{"count_given_cr", spec.likelihood.count_given_cr},
              {"count_given_not_cr", spec.likelihood.count_given_not_cr}}},
    });
  }
  json out{
      {"children", std::move(children)},
      {"criterion_id", node.criterion_id},
      {"evidence_specs", std::move(specs)},
      {"kind", std::string(to_string(node.kind))},
      {"text", node.text},
  };
  if (node.prior) out["prior"] = json{{"p_cr", node.prior->p_cr}, {"p_not_cr", node.prior->p_not_cr}};
  return out;
}

// Reads one JSON object field by field, reporting missing and mistyped
// fields as errors and anything left over as unknown-field warnings.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string pointer, std::vector<Diagnostic>& diagnostics)
      : value_(value), pointer_(std::move(pointer)), diagnostics_(diagnostics) {
    if (!value_.is_object()) {
      fail("expected an object", pointer_);
      valid_ = false;
    }
  }

  ~ObjectReader() {
    if (!valid_) return;
    for (const auto& [key, _] : value_.items()) {
      if (!seen_.count(key)) {
        diagnostics_.push_back(
            make_warning("unknown field '" + key + "'", Location{0, 0, child_pointer(key)}));
      }
    }
  }

  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  bool valid() const noexcept { return valid_; }
  const std::string& pointer() const noexcept { return pointer_; }

  std::string child_pointer(std::string_view key) const { return pointer_ + "/" + json_pointer_token(key); }

  const json* field(std::string_view key, bool required = true) {
    if (!valid_) return nullptr;
    seen_.insert(std::string(key));
    auto it = value_.find(key);
    if (it == value_.end() || (it->is_null() && !required)) {
      if (required) fail("missing field '" + std::string(key) + "'", pointer_);
      return nullptr;
    }
    return &*it;
  }

  std::string string(std::string_view key) {
    const json* v = field(key);
    if (!v) return {};
    if (!v->is_string()) {
      fail("field '" + std::string(key) + "' must be a string", child_pointer(key));
      return {};
    }
    return v->get<std::string>();
  }

  double number(std::string_view key) {
    const json* v = field(key);
    if (!v) return 0.0;
    if (!v->is_number()) {
      fail("field '" + std::string(key) + "' must be a number", child_pointer(key));
      return 0.0;
    }
    return v->get<double>();
  }

  std::uint64_t unsigned_integer(std::string_view key) {
    const json* v = field(key);
    if (!v) return 0;
    if (!v->is_number_unsigned()) {
      fail("field '" + std::string(key) + "' must be a non-negative integer", child_pointer(key));
      return 0;
    }
    return v->get<std::uint64_t>();
  }

  const json* array(std::string_view key) {
    const json* v = field(key);
    if (!v) return nullptr;
    if (!v->is_array()) {
      fail("field '" + std::string(key) + "' must be an array", child_pointer(key));
      return nullptr;
    }
    return v;
  }

  void fail(std::string message, std::string pointer) {
    diagnostics_.push_back(make_error(std::move(message), Location{0, 0, std::move(pointer)}));
  }

 private:
  const json& value_;
  std::string pointer_;
  std::vector<Diagnostic>& diagnostics_;
  std::set<std::string, std::less<>> seen_;
  bool valid_ = true;
};

ActionSpec read_action(const json* value, const std::string& pointer, std::vector<Diagnostic>& diags) {
  ActionSpec action;
  if (!value) return action;
  ObjectReader r(*value, pointer, diags);
  action.action_id = r.string("action_id");
  action.label = r.string("label");
  return action;
}

LikelihoodRow read_likelihood(const json* value, const std::string& pointer, std::vector<Diagnostic>& diags) {
  LikelihoodRow row;
  if (!value) return row;
  ObjectReader r(*value, pointer, diags);
  row.count_given_cr = r.number("count_given_cr");
  row.count_given_not_cr = r.number("count_given_not_cr");
  return row;
}

EvidenceSpec read_evidence(const json& value, const std::string& pointer, std::vector<Diagnostic>& diags) {
  EvidenceSpec spec;
  ObjectReader r(value, pointer, diags);
  spec.evidence_id = r.string("evidence_id");
  spec.description = r.string("description");
  if (const json* sources = r.array("accepted_sources")) {
    for (std::size_t i = 0; i < sources->size(); ++i) {
      const auto& s = (*sources)[i];
      const auto type = s.is_string() ? parse_source_type(s.get<std::string>()) : std::nullopt;
      if (!type) {
        r.fail("unknown source kind", r.child_pointer("accepted_sources") + "/" + std::to_string(i));
      } else {
        spec.accepted_sources.push_back(*type);
      }
    }
  }
  spec.likelihood = read_likelihood(r.field("likelihood"), r.child_pointer("likelihood"), diags);
  return spec;
}

CriterionNode read_node(const json& value, const std::string& pointer, std::size_t depth,
                        std::vector<Diagnostic>& diags) {
  CriterionNode node;
  ObjectReader r(value, pointer, diags);
  if (!r.valid()) return node;
  if (depth >= kMaxCriterionDepth) {
    r.fail("criterion nesting exceeds " + std::to_string(kMaxCriterionDepth) + " levels", pointer);
    return node;
  }
  node.criterion_id = r.string("criterion_id");
  node.text = r.string("text");
  const std::string kind = r.string("kind");
  if (const json* k = r.field("kind", false); k && k->is_string()) {
    if (auto parsed = parse_criterion_kind(kind)) {
      node.kind = *parsed;
    } else {
      r.fail("unknown criterion kind '" + kind + "'", r.child_pointer("kind"));
    }
  }
  if (const json* children = r.array("children")) {
    for (std::size_t i = 0; i < children->size(); ++i) {
      node.children.push_back(
          read_node((*children)[i], r.child_pointer("children") + "/" + std::to_string(i), depth + 1, diags));
    }
  }
  if (const json* specs = r.array("evidence_specs")) {
    for (std::size_t i = 0; i < specs->size(); ++i) {
      node.evidence_specs.push_back(
          read_evidence((*specs)[i], r.child_pointer("evidence_specs") + "/" + std::to_string(i), diags));
    }
  }
  if (const json* prior = r.field("prior", false)) {
    ObjectReader pr(*prior, r.child_pointer("prior"), diags);
    Prior p;
    p.p_cr = pr.number("p_cr");
    p.p_not_cr = pr.number("p_not_cr");
    node.prior = p;
  }
  return node;
}

}  // namespace

std::string json_pointer_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

json to_json(const JurisdictionPack& pack) {
  json paths = json::array();
  for (const auto& path : pack.paths) {
    json spans = json::array();
    for (const auto& span : path.source_spans) spans.push_back(json{{"begin", span.begin}, {"end", span.end}});
    paths.push_back(json{
        {"consequence",
         json{{"apply_action", action_to_json(path.consequence.apply_action)},
              {"consequence_id", path.consequence.consequence_id},
              {"reject_action", action_to_json(path.consequence.reject_action)},
              {"text", path.consequence.text},
              {"undetermined_action", action_to_json(path.consequence.undetermined_action)}}},
        {"path_id", path.path_id},
        {"root", node_to_json(path.root)},
        {"source_spans", std::move(spans)},
    });
  }
  return json{
      {"created_at", format_timestamp(pack.created_at)},
      {"jurisdiction", pack.jurisdiction},
      {"pack_id", pack.pack_id},
      {"paths", std::move(paths)},
      {"source_citation", pack.source_citation},
      {"version", pack.version},
  };
}

std::string canonical_json(const JurisdictionPack& pack) {
  return to_json(pack).dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

std::optional<JurisdictionPack> pack_from_json(const json& value, std::vector<Diagnostic>& diagnostics) {
  const std::size_t errors_before = count_errors(diagnostics);
  JurisdictionPack pack;
  {
    ObjectReader r(value, "", diagnostics);
    if (!r.valid()) return std::nullopt;
    pack.pack_id = r.string("pack_id");
    pack.jurisdiction = r.string("jurisdiction");
    pack.source_citation = r.string("source_citation");
    pack.version = r.string("version");
    if (const json* created = r.field("created_at")) {
      if (!created->is_string()) {
        r.fail("field 'created_at' must be a string", "/created_at");
      } else if (auto ts = parse_timestamp(created->get<std::string>())) {
        pack.created_at = *ts;
      } else {
        r.fail("created_at is not an ISO-8601 timestamp", "/created_at");
      }
    }
    if (const json* paths = r.array("paths")) {
      for (std::size_t i = 0; i < paths->size(); ++i) {
        const std::string base = "/paths/" + std::to_string(i);
        ObjectReader pr((*paths)[i], base, diagnostics);
        if (!pr.valid()) continue;
        DecisionPath path;
        path.path_id = pr.string("path_id");
        if (const json* cs = pr.field("consequence")) {
          ObjectReader cr(*cs, base + "/consequence", diagnostics);
          path.consequence.consequence_id = cr.string("consequence_id");
          path.consequence.text = cr.string("text");
          path.consequence.apply_action =
              read_action(cr.field("apply_action"), cr.child_pointer("apply_action"), diagnostics);
          path.consequence.reject_action =
              read_action(cr.field("reject_action"), cr.child_pointer("reject_action"), diagnostics);
          path.consequence.undetermined_action =
              read_action(cr.field("undetermined_action"), cr.child_pointer("undetermined_action"), diagnostics);
        }
        if (const json* root = pr.field("root")) path.root = read_node(*root, base + "/root", 0, diagnostics);
        if (const json* spans = pr.array("source_spans")) {
          for (std::size_t s = 0; s < spans->size(); ++s) {
            ObjectReader sr((*spans)[s], base + "/source_spans/" + std::to_string(s), diagnostics);
            path.source_spans.push_back({sr.unsigned_integer("begin"), sr.unsigned_integer("end")});
          }
        }
        pack.paths.push_back(std::move(path));
      }
    }
  }
  if (count_errors(diagnostics) != errors_before) return std::nullopt;
  return pack;
}

namespace {

// Walks JSON text that is already known to be well formed.
class LocationIndexer {
 public:
  explicit LocationIndexer(std::string_view text) : text_(text) {}

  std::map<std::string, Location> run() {
    skip_ws();
    value("", 0);
    return std::move(out_);
  }

 private:
  static constexpr std::size_t kMaxDepth = 256;

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      } else if (c != ' ' && c != '\t' && c != '\r') {
        break;
      }
      ++pos_;
    }
  }

  Location here(const std::string& pointer) const {
    return Location{line_, pos_ - line_start_ + 1, pointer};
  }

  std::string string_token() {
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') ++pos_;
      ++pos_;
    }
    ++pos_;
    const auto raw = text_.substr(start, pos_ - start);
    try {
      return json::parse(raw).get<std::string>();
    } catch (const json::exception&) {
      return std::string(raw);
    }
  }

  void value(const std::string& pointer, std::size_t depth) {
    if (pos_ >= text_.size()) return;
    out_.emplace(pointer, here(pointer));
    const char c = text_[pos_];
    if (depth > kMaxDepth) {
      skip_scalar_or_container();
      return;
    }
    if (c == '{') {
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '}') {
        ++pos_;
        return;
      }
      while (pos_ < text_.size()) {
        skip_ws();
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        value(pointer + "/" + json_pointer_token(key), depth + 1);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        ++pos_;  // '}'
        return;
      }
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return;
      }
      for (std::size_t i = 0; pos_ < text_.size(); ++i) {
        skip_ws();
        value(pointer + "/" + std::to_string(i), depth + 1);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        ++pos_;  // ']'
        return;
      }
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos) ++pos_;
    }
  }

  // Past the depth limit positions are no longer recorded; just skip.
  void skip_scalar_or_container() {
    std::size_t nesting = 0;
    bool in_string = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (in_string) {
        if (c == '\\') {
          ++pos_;
        } else if (c == '"') {
          in_string = false;
          if (nesting == 0) {
            ++pos_;
            return;
          }
        }
      } else if (c == '"') {
        in_string = true;
      } else if (c == '{' || c == '[') {
        ++nesting;
      } else if (c == '}' || c == ']') {
        if (nesting == 0) return;
        if (--nesting == 0) {
          ++pos_;
          return;
        }
      } else if (c == ',' && nesting == 0) {
        return;
      } else if (c == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
  std::map<std::string, Location> out_;
};

}  // namespace

std::map<std::string, Location> index_json_locations(std::string_view text) {
  return LocationIndexer(text).run();
}

}  // namespace lexpath
