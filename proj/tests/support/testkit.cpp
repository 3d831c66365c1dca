#include "testkit.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "lexpath/hash.hpp"
#include "lexpath/timestamp.hpp"

#ifndef LEXPATH_DATA_DIR
#error "LEXPATH_DATA_DIR must point at the bundled data directory"
#endif

namespace lexpath::testkit {

namespace fs = std::filesystem;

fs::path data_dir() { return fs::path(LEXPATH_DATA_DIR); }

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("lexpath-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                             std::to_string(rd() % 1000000));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush()) throw std::runtime_error("cannot write " + file.string());
}

namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "on public roads", "the driver", " ", "\"quoted\"", "back\\slash", "tab\there", "line\nbreak",
      "five million dollars ($5,000,000)", "Stra\xc3\x9f" "e", "\xe2\x82\xac", "\xf0\x9f\x9a\x97", "{", "}", "#",
      "ALL", "NOT", "0.5", "",
  };
  std::string out;
  const std::size_t n = pick(rng, 0, 5);
  for (std::size_t i = 0; i < n; ++i) out += pieces[pick(rng, 0, pieces.size() - 1)];
  return out;
}

std::string random_id(Rng& rng, const std::string& prefix, std::size_t serial) {
  static const std::vector<std::string> styles = {"", "_x", ".v2", ":a", "-b", " with space", "\"q\""};
  return prefix + std::to_string(serial) + styles[pick(rng, 0, styles.size() - 1)];
}

double random_count(Rng& rng) {
  switch (pick(rng, 0, 4)) {
    case 0: return static_cast<double>(pick(rng, 0, 20));
    case 1: return uniform(rng, 0.0, 1.0);
    case 2: return uniform(rng, 0.0, 1000.0);
    case 3: return std::ldexp(uniform(rng, 0.5, 1.0), -static_cast<int>(pick(rng, 1, 40)));
    default: return std::round(uniform(rng, 0.0, 1.0) * 100.0) / 100.0;
  }
}

Timestamp random_timestamp(Rng& rng) {
  using namespace std::chrono;
  const auto ms = static_cast<std::int64_t>(pick(rng, 0, 4'000'000'000ULL)) * 1000 +
                  static_cast<std::int64_t>(pick(rng, 0, 1) ? pick(rng, 0, 999) : 0);
  return Timestamp{milliseconds{ms}};
}

struct PackBuilder {
  Rng& rng;
  std::size_t next_criterion = 0;
  std::size_t next_evidence = 0;

  CriterionNode node(std::size_t depth) {
    CriterionNode n;
    n.criterion_id = random_id(rng, "c", next_criterion++);
    n.text = random_text(rng);
    const std::size_t choice = depth >= 3 ? 0 : pick(rng, 0, 3);
    if (choice == 0) {
      n.kind = CriterionKind::Leaf;
      const double p = pick(rng, 0, 3) == 0 ? 0.5 : uniform(rng, 0.0, 1.0);
      n.prior = Prior{p, 1.0 - p};
      const std::size_t specs = pick(rng, 0, 3);
      for (std::size_t i = 0; i < specs; ++i) {
        EvidenceSpec s;
        s.evidence_id = random_id(rng, "e", next_evidence++);
        s.description = random_text(rng);
        for (auto t : {SourceType::Sensor, SourceType::Geospatial, SourceType::Document, SourceType::Manual}) {
          if (pick(rng, 0, 2) == 0) s.accepted_sources.push_back(t);
        }
        do {
          s.likelihood = {random_count(rng), random_count(rng)};
        } while (s.likelihood.degenerate());
        n.evidence_specs.push_back(std::move(s));
      }
      return n;
    }
    n.kind = choice == 1 ? CriterionKind::All : choice == 2 ? CriterionKind::Any : CriterionKind::Not;
    const std::size_t arity = n.kind == CriterionKind::Not ? 1 : pick(rng, 2, 4);
    for (std::size_t i = 0; i < arity; ++i) n.children.push_back(node(depth + 1));
    return n;
  }
};

}  // namespace

JurisdictionPack random_pack(Rng& rng) {
  JurisdictionPack pack;
  pack.pack_id = "pack-" + std::to_string(pick(rng, 0, 999)) + (pick(rng, 0, 1) ? ".x_y" : "");
  pack.jurisdiction = random_text(rng);
  pack.source_citation = random_text(rng);
  pack.version = std::to_string(pick(rng, 0, 12)) + "." + std::to_string(pick(rng, 0, 12)) + "." +
                 std::to_string(pick(rng, 0, 200));
  pack.created_at = random_timestamp(rng);
  PackBuilder builder{rng};
  const std::size_t paths = pick(rng, 1, 3);
  for (std::size_t i = 0; i < paths; ++i) {
    DecisionPath path;
    path.path_id = random_id(rng, "path", i);
    path.consequence.consequence_id = random_id(rng, "cs", i);
    path.consequence.text = random_text(rng);
    path.consequence.apply_action = {random_id(rng, "apply", i), random_text(rng)};
    path.consequence.reject_action = {random_id(rng, "reject", i), random_text(rng)};
    path.consequence.undetermined_action = {random_id(rng, "undetermined", i), random_text(rng)};
    const std::size_t spans = pick(rng, 0, 3);
    for (std::size_t s = 0; s < spans; ++s) {
      const auto b = pick(rng, 0, 100000);
      path.source_spans.push_back({b, b + pick(rng, 0, 5000)});
    }
    path.root = builder.node(0);
    pack.paths.push_back(std::move(path));
  }
  return pack;
}

Trace random_trace(Rng& rng, std::size_t events) {
  TraceHeader header{sha256_hex(std::to_string(rng())).substr(0, 16), "pack-" + std::to_string(pick(rng, 0, 99)),
                     "1.0." + std::to_string(pick(rng, 0, 9)), random_id(rng, "path", 0),
                     pick(rng, 0, 1) ? "argmax" : "threshold:0.69999999999999996"};
  Trace trace(header);
  for (std::size_t i = 0; i < events; ++i) {
    TraceEvent e;
    e.kind = static_cast<EventKind>(pick(rng, 0, static_cast<std::size_t>(EventKind::Error)));
    const std::size_t subjects = pick(rng, 0, 4);
    for (std::size_t s = 0; s < subjects; ++s) e.subjects[random_id(rng, "k", s)] = random_text(rng);
    const std::size_t values = pick(rng, 0, 4);
    for (std::size_t v = 0; v < values; ++v) e.values["v" + std::to_string(v)] = format_probability(uniform(rng, 0, 1));
    e.timestamp = random_timestamp(rng);
    trace.append(std::move(e));
  }
  return trace;
}

std::string mutate(const std::string& text, Rng& rng) {
  std::string out = text;
  const std::size_t edits = pick(rng, 1, 8);
  for (std::size_t i = 0; i < edits; ++i) {
    const std::size_t pos = out.empty() ? 0 : pick(rng, 0, out.size() - 1);
    switch (pick(rng, 0, 6)) {
      case 0:
        if (!out.empty()) out[pos] = static_cast<char>(pick(rng, 0, 255));
        break;
      case 1:
        if (!out.empty()) out.erase(pos, pick(rng, 1, 40));
        break;
      case 2: out.insert(pos, out.substr(pick(rng, 0, out.size()), pick(rng, 1, 60))); break;
      case 3: {
        static const std::vector<std::string> tokens = {"{", "}", "\"", "\\", "ALL", "NOT", "PATH", "1e308", "-1",
                                                        "nan", "[", "]", ":", ",", "\n", "\xff", "\xc3", "null"};
        out.insert(pos, tokens[pick(rng, 0, tokens.size() - 1)]);
        break;
      }
      case 4: out.resize(pos); break;
      case 5: {
        // Deep nesting.
        std::string open, close;
        for (std::size_t d = 0; d < pick(rng, 10, 300); ++d) {
          open += "ALL n" + std::to_string(d) + " \"t\" {\n";
          close += "}\n";
        }
        out.insert(pos, open + close);
        break;
      }
      default:
        if (out.size() > 1) std::swap(out[pos], out[pick(rng, 0, out.size() - 1)]);
        break;
    }
  }
  return out;
}

EvidenceRecord make_record(const std::string& record_id, const std::string& evidence_id, SourceType kind,
                           const std::string& timestamp) {
  EvidenceRecord r;
  r.record_id = record_id;
  r.evidence_id = evidence_id;
  r.source = {kind, "src-" + evidence_id};
  r.timestamp = *parse_timestamp(timestamp);
  r.payload_digest = sha256_hex(record_id + "|" + evidence_id);
  return r;
}

double joint_posterior(double prior_p_cr, const std::vector<LikelihoodRow>& rows) {
  double cr = prior_p_cr;
  double not_cr = 1.0 - prior_p_cr;
  for (const auto& row : rows) {
    const double total = row.count_given_cr + row.count_given_not_cr;
    cr *= row.count_given_cr / total;
    not_cr *= row.count_given_not_cr / total;
  }
  return cr / (cr + not_cr);
}

namespace {

int rank(Status s) { return s == Status::Rejected ? 0 : s == Status::Undetermined ? 1 : 2; }
Status unrank(int r) { return r == 0 ? Status::Rejected : r == 1 ? Status::Undetermined : Status::Established; }

}  // namespace

Status kleene_oracle(const CriterionNode& node, const StatusMap& leaves) {
  switch (node.kind) {
    case CriterionKind::Leaf: return leaves.at(node.criterion_id).status;
    case CriterionKind::Not: return unrank(2 - rank(kleene_oracle(node.children.at(0), leaves)));
    case CriterionKind::All:
    case CriterionKind::Any: {
      int acc = node.kind == CriterionKind::All ? 2 : 0;
      for (const auto& c : node.children) {
        const int r = rank(kleene_oracle(c, leaves));
        acc = node.kind == CriterionKind::All ? std::min(acc, r) : std::max(acc, r);
      }
      return unrank(acc);
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

void relabel(CriterionNode& n, std::size_t& leaves, std::size_t& inner) {
  if (n.is_leaf()) {
    n.criterion_id = "l" + std::to_string(leaves++);
    n.prior = Prior{0.5, 0.5};
    return;
  }
  n.criterion_id = "n" + std::to_string(inner++);
  for (auto& c : n.children) relabel(c, leaves, inner);
}

void tuples(const std::vector<CriterionNode>& pool, std::size_t arity, std::vector<CriterionNode>& current,
            const std::function<void(const std::vector<CriterionNode>&)>& emit) {
  if (current.size() == arity) {
    emit(current);
    return;
  }
  for (const auto& t : pool) {
    current.push_back(t);
    tuples(pool, arity, current, emit);
    current.pop_back();
  }
}

}  // namespace

std::vector<CriterionNode> enumerate_trees(std::size_t levels, std::size_t max_arity) {
  CriterionNode leaf;
  leaf.kind = CriterionKind::Leaf;
  std::vector<CriterionNode> trees{leaf};
  for (std::size_t level = 2; level <= levels; ++level) {
    std::vector<CriterionNode> next{leaf};
    for (const auto& t : trees) {
      CriterionNode n;
      n.kind = CriterionKind::Not;
      n.children = {t};
      next.push_back(std::move(n));
    }
    for (auto kind : {CriterionKind::All, CriterionKind::Any}) {
      for (std::size_t arity = 2; arity <= max_arity; ++arity) {
        std::vector<CriterionNode> current;
        tuples(trees, arity, current, [&](const std::vector<CriterionNode>& children) {
          CriterionNode n;
          n.kind = kind;
          n.children = children;
          next.push_back(n);
        });
      }
    }
    trees = std::move(next);
  }
  for (auto& t : trees) {
    std::size_t leaves = 0, inner = 0;
    relabel(t, leaves, inner);
  }
  return trees;
}

std::vector<std::string> leaf_ids(const CriterionNode& root) {
  std::vector<std::string> out;
  for_each_node(root, [&](const CriterionNode& n, std::size_t) {
    if (n.is_leaf()) out.push_back(n.criterion_id);
  });
  return out;
}

}  // namespace lexpath::testkit
