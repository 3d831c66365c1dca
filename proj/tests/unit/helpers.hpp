#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lexpath/document.hpp"
#include "lexpath/error.hpp"
#include "testkit.hpp"

namespace lexpath::test {

inline JurisdictionPack bundled_pack() {
  auto r = parse_document(
      PathDocument{testkit::read_file(testkit::data_dir() / "source" / "us-ca-cvc-38750b.lexpath"), std::nullopt});
  if (!r.pack) throw std::runtime_error("bundled pack does not parse");
  return *r.pack;
}

/// The bundled pack with E2 learned to (1.1, 0.9), as stored in 1.0.1.json.
inline JurisdictionPack learned_pack() {
  auto r = parse_document(
      PathDocument{testkit::read_file(testkit::data_dir() / "packs" / "us-ca-cvc-38750b" / "1.0.1.json"), std::nullopt});
  if (!r.pack) throw std::runtime_error("bundled 1.0.1 pack does not parse");
  return *r.pack;
}

inline CriterionNode leaf(const std::string& id, double prior, std::vector<EvidenceSpec> specs = {}) {
  CriterionNode n;
  n.criterion_id = id;
  n.text = id + " text";
  n.prior = Prior{prior, 1.0 - prior};
  n.evidence_specs = std::move(specs);
  return n;
}

inline CriterionNode combine(CriterionKind kind, const std::string& id, std::vector<CriterionNode> children) {
  CriterionNode n;
  n.kind = kind;
  n.criterion_id = id;
  n.text = id + " text";
  n.children = std::move(children);
  return n;
}

inline EvidenceSpec spec(const std::string& id, double cr, double not_cr, std::vector<SourceType> sources = {}) {
  return EvidenceSpec{id, id + " description", std::move(sources), LikelihoodRow{cr, not_cr}};
}

/// Single-path pack: ALL(a, b) where a has evidence ea (0.9/0.1) and b has eb (0.8/0.2).
inline JurisdictionPack small_pack() {
  JurisdictionPack p;
  p.pack_id = "small";
  p.jurisdiction = "Test";
  p.source_citation = "Test Code 1";
  p.version = "1.0.0";
  p.created_at = Timestamp{std::chrono::milliseconds{1'700'000'000'000}};
  DecisionPath path;
  path.path_id = "p";
  path.consequence = {"cs", "consequence text", {"go", "Go"}, {"stop", "Stop"}, {"wait", "Wait"}};
  path.root = combine(CriterionKind::All, "root",
                      {leaf("a", 0.5, {spec("ea", 0.9, 0.1, {SourceType::Sensor})}), leaf("b", 0.5, {spec("eb", 0.8, 0.2)})});
  p.paths.push_back(std::move(path));
  return p;
}

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

inline CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a lexpath::Error");
}

}  // namespace lexpath::test
