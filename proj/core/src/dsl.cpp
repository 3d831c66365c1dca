// `.lexpath` decision-path language: lexer, LL(1) parser, and writer.
// Grammar reference: docs/grammar.md.

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "lexpath/document.hpp"
#include "lexpath/pack_json.hpp"

namespace lexpath {
namespace {

constexpr std::array<std::string_view, 19> kKeywords = {
    "PACK",  "JURISDICTION", "CITATION", "VERSION", "CREATED",      "EVIDENCE", "SOURCES",
    "LIKELIHOOD", "PATH",    "CONSEQUENCE", "APPLY", "REJECT", "UNDETERMINED", "SPAN",
    "ALL",   "ANY",          "NOT",      "CRITERION", "PRIOR",
};

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }

bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '.' || c == '-' || c == ':';
}

bool is_bare_name(std::string_view name) {
  if (name.empty() || !ident_start(name.front()) || is_keyword(name)) return false;
  for (char c : name) {
    if (!ident_char(c)) return false;
  }
  return true;
}

enum class TokenType { Keyword, Ident, String, Number, LBrace, RBrace, End };

struct Token {
  TokenType type = TokenType::End;
  std::string text;
  double number = 0.0;
  bool integral = false;
  Location loc;
};

std::string describe(const Token& t) {
  switch (t.type) {
    case TokenType::Keyword: return "keyword " + t.text;
    case TokenType::Ident: return "identifier '" + t.text + "'";
    case TokenType::String: return "string \"" + t.text + "\"";
    case TokenType::Number: return "number " + t.text;
    case TokenType::LBrace: return "'{'";
    case TokenType::RBrace: return "'}'";
    case TokenType::End: return "end of document";
  }
  return "token";
}

struct SyntaxError {
  Diagnostic diagnostic;
};

[[noreturn]] void syntax_error(std::string message, const Location& loc) {
  throw SyntaxError{make_error(std::move(message), Location{loc.line, loc.column, {}})};
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {
    if (text_.starts_with("\xEF\xBB\xBF")) {
      pos_ = 3;
      line_start_ = 3;
    }
  }

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_space_and_comments();
      Token t;
      t.loc = here();
      if (pos_ >= text_.size()) {
        tokens.push_back(std::move(t));
        return tokens;
      }
      const char c = text_[pos_];
      if (c == '{' || c == '}') {
        t.type = c == '{' ? TokenType::LBrace : TokenType::RBrace;
        t.text = std::string(1, c);
        ++pos_;
      } else if (c == '"') {
        t.type = TokenType::String;
        t.text = string_literal();
      } else if (ident_start(c)) {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        t.text = std::string(text_.substr(start, pos_ - start));
        t.type = is_keyword(t.text) ? TokenType::Keyword : TokenType::Ident;
      } else if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.') {
        number(t);
      } else {
        syntax_error(std::string("unexpected character '") + (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f ? "?" : std::string(1, c)) + "'", t.loc);
      }
      tokens.push_back(std::move(t));
    }
  }

 private:
  Location here() const { return Location{line_, pos_ - line_start_ + 1, {}}; }

  void newline() {
    ++line_;
    line_start_ = pos_ + 1;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        newline();
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string string_literal() {
    const Location start = here();
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) syntax_error("unterminated string", start);
      const char c = text_[pos_];
      if (c == '"') {
        ++pos_;
        return out;
      }
      if (c == '\n') syntax_error("unterminated string", start);
      if (c != '\\') {
        out += c;
        ++pos_;
        continue;
      }
      const Location esc = here();
      if (++pos_ >= text_.size()) syntax_error("unterminated string", start);
      const char e = text_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'u': {
          if (pos_ + 4 > text_.size()) syntax_error("truncated \\u escape", esc);
          std::uint32_t cp = 0;
          const auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + pos_ + 4, cp, 16);
          if (ec != std::errc{} || p != text_.data() + pos_ + 4) syntax_error("invalid \\u escape", esc);
          if (cp >= 0xD800 && cp <= 0xDFFF) syntax_error("surrogate code point in \\u escape", esc);
          pos_ += 4;
          append_utf8(out, cp);
          break;
        }
        default: syntax_error(std::string("invalid escape '\\") + (e >= 0x20 && e < 0x7f ? std::string(1, e) : "?") + "'", esc);
      }
    }
  }

  void number(Token& t) {
    const std::size_t start = pos_;
    if (text_[pos_] == '-' || text_[pos_] == '+') ++pos_;
    bool digits = false;
    bool integral = true;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
      ++pos_;
      digits = true;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      integral = false;
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        digits = true;
      }
    }
    if (digits && pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      integral = false;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
      bool exp_digits = false;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        exp_digits = true;
      }
      if (!exp_digits) digits = false;
    }
    t.text = std::string(text_.substr(start, pos_ - start));
    if (!digits || (pos_ < text_.size() && ident_char(text_[pos_]))) syntax_error("malformed number '" + t.text + "'", t.loc);
    std::string_view body = t.text;
    if (body.front() == '+') body.remove_prefix(1);
    const auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), t.number);
    if (ec != std::errc{} || p != body.data() + body.size()) syntax_error("malformed number '" + t.text + "'", t.loc);
    t.type = TokenType::Number;
    t.integral = integral && t.text.front() != '-';
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

struct EvidenceDecl {
  EvidenceSpec spec;
  Location decl;
  Location likelihood;
  Location sources;
  bool used = false;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ParseResult run() {
    ParseResult result;
    try {
      parse_document();
    } catch (const SyntaxError& e) {
      result.diagnostics.push_back(e.diagnostic);
      return result;
    }
    resolve_evidence(result.diagnostics);
    if (has_errors(result.diagnostics)) return result;

    for (const auto& [id, decl] : decls_) {
      if (!decl.used) {
        result.diagnostics.push_back(
            make_warning("evidence '" + id + "' is declared but not used by any criterion", decl.decl));
      }
    }
    auto validation = validate_pack(pack_);
    for (auto& d : validation) {
      d.location = locate(d.location.pointer);
      result.diagnostics.push_back(std::move(d));
    }
    if (!has_errors(result.diagnostics)) result.pack = std::move(pack_);
    return result;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.type != TokenType::End) ++pos_;
    return t;
  }
  bool at_keyword(std::string_view kw) const {
    return peek().type == TokenType::Keyword && peek().text == kw;
  }

  const Token& expect(TokenType type, std::string_view what) {
    if (peek().type != type) syntax_error("expected " + std::string(what) + ", found " + describe(peek()), peek().loc);
    return next();
  }

  std::string name(std::string_view what) {
    if (peek().type != TokenType::Ident && peek().type != TokenType::String) {
      syntax_error("expected " + std::string(what) + ", found " + describe(peek()), peek().loc);
    }
    return next().text;
  }

  std::string string(std::string_view what) { return expect(TokenType::String, what).text; }

  double number(std::string_view what) { return expect(TokenType::Number, what).number; }

  std::uint64_t offset(std::string_view what) {
    const Token& t = expect(TokenType::Number, what);
    if (!t.integral || t.number > 9.0e15) syntax_error(std::string(what) + " must be a non-negative integer", t.loc);
    return static_cast<std::uint64_t>(t.number);
  }

  void once(bool& seen, const Token& kw, std::string_view block) {
    if (seen) syntax_error(kw.text + " given twice in " + std::string(block), kw.loc);
    seen = true;
  }

  void mark(const std::string& pointer, const Location& loc) { locations_.emplace(pointer, loc); }

  Location locate(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
      if (auto it = locations_.find(p); it != locations_.end()) {
        return Location{it->second.line, it->second.column, pointer};
      }
      const auto slash = p.rfind('/');
      if (slash == std::string::npos || p.empty()) break;
      p.resize(slash);
    }
    return Location{1, 1, pointer};
  }

  void parse_document() {
    if (peek().type == TokenType::End) syntax_error("no paths declared", peek().loc);
    if (!at_keyword("PACK")) syntax_error("expected PACK header, found " + describe(peek()), peek().loc);
    parse_header();
    while (peek().type != TokenType::End) {
      if (at_keyword("EVIDENCE")) {
        parse_evidence_decl();
      } else if (at_keyword("PATH")) {
        parse_path();
      } else {
        syntax_error("expected EVIDENCE or PATH, found " + describe(peek()), peek().loc);
      }
    }
    if (pack_.paths.empty()) syntax_error("no paths declared", peek().loc);
  }

  void parse_header() {
    const Token& kw = next();
    mark("", kw.loc);
    mark("/pack_id", peek().loc);
    pack_.pack_id = name("pack id");
    expect(TokenType::LBrace, "'{' after PACK name");
    bool jurisdiction = false, citation = false, version = false, created = false;
    while (peek().type != TokenType::RBrace) {
      const Token& field = expect(TokenType::Keyword, "a PACK field");
      if (field.text == "JURISDICTION") {
        once(jurisdiction, field, "PACK");
        mark("/jurisdiction", field.loc);
        pack_.jurisdiction = string("jurisdiction string");
      } else if (field.text == "CITATION") {
        once(citation, field, "PACK");
        mark("/source_citation", field.loc);
        pack_.source_citation = string("citation string");
      } else if (field.text == "VERSION") {
        once(version, field, "PACK");
        mark("/version", field.loc);
        pack_.version = name("version");
      } else if (field.text == "CREATED") {
        once(created, field, "PACK");
        mark("/created_at", field.loc);
        const Token& ts = expect(TokenType::String, "timestamp string");
        auto parsed = parse_timestamp(ts.text);
        if (!parsed) syntax_error("CREATED is not an ISO-8601 timestamp", ts.loc);
        pack_.created_at = *parsed;
      } else {
        syntax_error("unexpected " + describe(field) + " in PACK header", field.loc);
      }
    }
    const Token& close = next();
    const auto missing = [&](bool seen, std::string_view f) {
      if (!seen) syntax_error("PACK header is missing " + std::string(f), close.loc);
    };
    missing(jurisdiction, "JURISDICTION");
    missing(citation, "CITATION");
    missing(version, "VERSION");
    missing(created, "CREATED");
  }

  void parse_evidence_decl() {
    const Token& kw = next();
    EvidenceDecl decl;
    decl.decl = kw.loc;
    decl.spec.evidence_id = name("evidence id");
    if (peek().type == TokenType::String) decl.spec.description = next().text;
    expect(TokenType::LBrace, "'{' after EVIDENCE declaration");
    bool sources = false, likelihood = false;
    while (peek().type != TokenType::RBrace) {
      const Token& field = expect(TokenType::Keyword, "SOURCES or LIKELIHOOD");
      if (field.text == "SOURCES") {
        once(sources, field, "EVIDENCE");
        decl.sources = field.loc;
        if (peek().type != TokenType::Ident) syntax_error("SOURCES needs at least one source kind", peek().loc);
        while (peek().type == TokenType::Ident) {
          const Token& s = next();
          auto type = parse_source_type(s.text);
          if (!type) syntax_error("unknown source kind '" + s.text + "'", s.loc);
          decl.spec.accepted_sources.push_back(*type);
        }
      } else if (field.text == "LIKELIHOOD") {
        once(likelihood, field, "EVIDENCE");
        decl.likelihood = field.loc;
        decl.spec.likelihood.count_given_cr = number("count given Cr");
        decl.spec.likelihood.count_given_not_cr = number("count given not Cr");
      } else {
        syntax_error("unexpected " + describe(field) + " in EVIDENCE declaration", field.loc);
      }
    }
    const Token& close = next();
    if (!likelihood) syntax_error("EVIDENCE '" + decl.spec.evidence_id + "' is missing LIKELIHOOD", close.loc);
    if (!sources) decl.sources = decl.decl;
    const std::string id = decl.spec.evidence_id;
    if (!decls_.emplace(id, std::move(decl)).second) {
      syntax_error("evidence '" + id + "' declared twice", kw.loc);
    }
  }

  void parse_path() {
    const Token& kw = next();
    DecisionPath path;
    const std::string base = "/paths/" + std::to_string(pack_.paths.size());
    mark(base, kw.loc);
    mark(base + "/path_id", peek().loc);
    path.path_id = name("path id");
    expect(TokenType::LBrace, "'{' after PATH name");
    bool consequence = false, root = false;
    while (peek().type != TokenType::RBrace) {
      const Token& t = peek();
      if (t.type != TokenType::Keyword) syntax_error("expected CONSEQUENCE, SPAN or a criterion, found " + describe(t), t.loc);
      if (t.text == "CONSEQUENCE") {
        once(consequence, t, "PATH");
        path.consequence = parse_consequence(base + "/consequence");
      } else if (t.text == "SPAN") {
        next();
        mark(base + "/source_spans/" + std::to_string(path.source_spans.size()), t.loc);
        SourceSpan span;
        span.begin = offset("span begin");
        span.end = offset("span end");
        path.source_spans.push_back(span);
      } else if (t.text == "ALL" || t.text == "ANY" || t.text == "NOT" || t.text == "CRITERION") {
        if (root) syntax_error("PATH '" + path.path_id + "' has more than one root criterion", t.loc);
        root = true;
        path.root = parse_node(base + "/root", 0);
      } else {
        syntax_error("unexpected " + describe(t) + " in PATH", t.loc);
      }
    }
    const Token& close = next();
    if (!consequence) syntax_error("PATH '" + path.path_id + "' has no CONSEQUENCE", close.loc);
    if (!root) syntax_error("PATH '" + path.path_id + "' has no criterion", close.loc);
    pack_.paths.push_back(std::move(path));
  }

  Consequence parse_consequence(const std::string& pointer) {
    const Token& kw = next();
    mark(pointer, kw.loc);
    Consequence cs;
    mark(pointer + "/consequence_id", peek().loc);
    cs.consequence_id = name("consequence id");
    cs.text = string("consequence text");
    expect(TokenType::LBrace, "'{' after CONSEQUENCE");
    bool apply = false, reject = false, undetermined = false;
    while (peek().type != TokenType::RBrace) {
      const Token& field = expect(TokenType::Keyword, "APPLY, REJECT or UNDETERMINED");
      ActionSpec* target = nullptr;
      if (field.text == "APPLY") {
        once(apply, field, "CONSEQUENCE");
        target = &cs.apply_action;
        mark(pointer + "/apply_action", field.loc);
      } else if (field.text == "REJECT") {
        once(reject, field, "CONSEQUENCE");
        target = &cs.reject_action;
        mark(pointer + "/reject_action", field.loc);
      } else if (field.text == "UNDETERMINED") {
        once(undetermined, field, "CONSEQUENCE");
        target = &cs.undetermined_action;
        mark(pointer + "/undetermined_action", field.loc);
      } else {
        syntax_error("unexpected " + describe(field) + " in CONSEQUENCE", field.loc);
      }
      target->action_id = name("action id");
      target->label = string("action label");
    }
    const Token& close = next();
    if (!apply || !reject || !undetermined) {
      syntax_error("CONSEQUENCE '" + cs.consequence_id + "' needs APPLY, REJECT and UNDETERMINED actions", close.loc);
    }
    return cs;
  }

  CriterionNode parse_node(const std::string& pointer, std::size_t depth) {
    const Token& kw = next();
    if (depth >= kMaxCriterionDepth) {
      syntax_error("criterion nesting exceeds " + std::to_string(kMaxCriterionDepth) + " levels", kw.loc);
    }
    mark(pointer, kw.loc);
    CriterionNode node;
    node.kind = kw.text == "CRITERION" ? CriterionKind::Leaf : *parse_criterion_kind(kw.text);
    mark(pointer + "/criterion_id", peek().loc);
    node.criterion_id = name("criterion id");
    node.text = string("criterion text");
    expect(TokenType::LBrace, "'{' after criterion text");
    bool prior = false;
    while (peek().type != TokenType::RBrace) {
      const Token& t = peek();
      if (t.type != TokenType::Keyword) syntax_error("unexpected " + describe(t) + " in criterion", t.loc);
      const bool child_kw = t.text == "ALL" || t.text == "ANY" || t.text == "NOT" || t.text == "CRITERION";
      if (node.is_leaf()) {
        if (child_kw) syntax_error("LEAF must have no children", t.loc);
        next();
        if (t.text == "PRIOR") {
          once(prior, t, "CRITERION");
          mark(pointer + "/prior", t.loc);
          Prior p;
          p.p_cr = number("P(Cr)");
          p.p_not_cr = number("P(not Cr)");
          node.prior = p;
        } else if (t.text == "EVIDENCE") {
          if (peek().type != TokenType::Ident && peek().type != TokenType::String) {
            syntax_error("EVIDENCE needs at least one evidence id", peek().loc);
          }
          while (peek().type == TokenType::Ident || peek().type == TokenType::String) {
            const Token& ref = next();
            const std::string spec_pointer = pointer + "/evidence_specs/" + std::to_string(node.evidence_specs.size());
            mark(spec_pointer, ref.loc);
            EvidenceSpec placeholder;
            placeholder.evidence_id = ref.text;
            node.evidence_specs.push_back(std::move(placeholder));
          }
        } else {
          syntax_error("unexpected " + describe(t) + " in CRITERION", t.loc);
        }
      } else {
        if (t.text == "PRIOR") syntax_error("only LEAF criteria carry a prior", t.loc);
        if (t.text == "EVIDENCE") syntax_error("only LEAF criteria carry evidence", t.loc);
        if (!child_kw) syntax_error("unexpected " + describe(t) + " in " + kw.text, t.loc);
        node.children.push_back(parse_node(pointer + "/children/" + std::to_string(node.children.size()), depth + 1));
      }
    }
    const Token& close = next();
    if (node.is_leaf() && !prior) syntax_error("CRITERION '" + node.criterion_id + "' is missing PRIOR", close.loc);
    return node;
  }

  void resolve_node(CriterionNode& node, const std::string& pointer, std::vector<Diagnostic>& diags) {
    for (std::size_t i = 0; i < node.evidence_specs.size(); ++i) {
      auto& spec = node.evidence_specs[i];
      const std::string spec_pointer = pointer + "/evidence_specs/" + std::to_string(i);
      auto it = decls_.find(spec.evidence_id);
      if (it == decls_.end()) {
        diags.push_back(make_error("unresolved evidence " + spec.evidence_id, locate(spec_pointer)));
        continue;
      }
      it->second.used = true;
      spec = it->second.spec;
      mark(spec_pointer + "/likelihood", it->second.likelihood);
      mark(spec_pointer + "/accepted_sources", it->second.sources);
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      resolve_node(node.children[i], pointer + "/children/" + std::to_string(i), diags);
    }
  }

  void resolve_evidence(std::vector<Diagnostic>& diags) {
    for (std::size_t i = 0; i < pack_.paths.size(); ++i) {
      resolve_node(pack_.paths[i].root, "/paths/" + std::to_string(i) + "/root", diags);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  JurisdictionPack pack_;
  std::map<std::string, EvidenceDecl, std::less<>> decls_;
  std::map<std::string, Location> locations_;
};

// ---------------------------------------------------------------------------
// Writer

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

std::string write_name(std::string_view name) { return is_bare_name(name) ? std::string(name) : quote(name); }

std::string write_number(double value) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, ec == std::errc{} ? p : buf);
  // Non-finite values cannot come from a valid pack; keep the output parseable.
  if (!std::isfinite(value)) out = "0";
  return out;
}

class Writer {
 public:
  std::string run(const JurisdictionPack& pack) {
    out_ += "PACK " + write_name(pack.pack_id) + " {\n";
    out_ += "  JURISDICTION " + quote(pack.jurisdiction) + "\n";
    out_ += "  CITATION " + quote(pack.source_citation) + "\n";
    out_ += "  VERSION " + quote(pack.version) + "\n";
    out_ += "  CREATED " + quote(format_timestamp(pack.created_at)) + "\n";
    out_ += "}\n";

    std::set<std::string, std::less<>> written;
    for (const auto& path : pack.paths) {
      for_each_node(path.root, [&](const CriterionNode& node, std::size_t) {
        for (const auto& spec : node.evidence_specs) {
          if (!written.insert(spec.evidence_id).second) continue;
          out_ += "\nEVIDENCE " + write_name(spec.evidence_id) + " " + quote(spec.description) + " {\n";
          if (!spec.accepted_sources.empty()) {
            out_ += "  SOURCES";
            for (auto s : spec.accepted_sources) {
              out_ += ' ';
              out_ += to_string(s);
            }
            out_ += '\n';
          }
          out_ += "  LIKELIHOOD " + write_number(spec.likelihood.count_given_cr) + " " +
                  write_number(spec.likelihood.count_given_not_cr) + "\n";
          out_ += "}\n";
        }
      });
    }

    for (const auto& path : pack.paths) {
      out_ += "\nPATH " + write_name(path.path_id) + " {\n";
      const auto& cs = path.consequence;
      out_ += "  CONSEQUENCE " + write_name(cs.consequence_id) + " " + quote(cs.text) + " {\n";
      out_ += "    APPLY " + write_name(cs.apply_action.action_id) + " " + quote(cs.apply_action.label) + "\n";
      out_ += "    REJECT " + write_name(cs.reject_action.action_id) + " " + quote(cs.reject_action.label) + "\n";
      out_ += "    UNDETERMINED " + write_name(cs.undetermined_action.action_id) + " " +
              quote(cs.undetermined_action.label) + "\n";
      out_ += "  }\n";
      for (const auto& span : path.source_spans) {
        out_ += "  SPAN " + std::to_string(span.begin) + " " + std::to_string(span.end) + "\n";
      }
      node(path.root, 1);
      out_ += "}\n";
    }
    return std::move(out_);
  }

 private:
  void node(const CriterionNode& n, std::size_t depth) {
    const std::string indent(depth * 2, ' ');
    const std::string_view kw = n.is_leaf() ? std::string_view("CRITERION") : to_string(n.kind);
    out_ += indent;
    out_ += kw;
    out_ += " " + write_name(n.criterion_id) + " " + quote(n.text) + " {\n";
    if (n.is_leaf()) {
      const Prior p = n.prior.value_or(Prior{});
      out_ += indent + "  PRIOR " + write_number(p.p_cr) + " " + write_number(p.p_not_cr) + "\n";
      if (!n.evidence_specs.empty()) {
        out_ += indent + "  EVIDENCE";
        for (const auto& spec : n.evidence_specs) out_ += " " + write_name(spec.evidence_id);
        out_ += '\n';
      }
    } else {
      for (const auto& child : n.children) node(child, depth + 1);
    }
    out_ += indent + "}\n";
  }

  std::string out_;
};

}  // namespace

ParseResult parse_dsl(std::string_view text) {
  std::size_t bad = 0;
  if (!is_valid_utf8(text, &bad)) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < bad; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    ParseResult r;
    r.diagnostics.push_back(make_error("document is not valid UTF-8", Location{line, col, {}}));
    return r;
  }
  std::vector<Token> tokens;
  try {
    tokens = Lexer(text).run();
  } catch (const SyntaxError& e) {
    ParseResult r;
    r.diagnostics.push_back(e.diagnostic);
    return r;
  }
  return Parser(std::move(tokens)).run();
}

std::string write_dsl(const JurisdictionPack& pack) { return Writer{}.run(pack); }

}  // namespace lexpath
