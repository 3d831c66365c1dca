// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "cli.hpp"
#include "lexpath/document.hpp"
#include "lexpath/extraction.hpp"
#include "lexpath/inference.hpp"
#include "lexpath/review.hpp"
#include "lexpath/trace.hpp"
#include "testkit.hpp"

using namespace lexpath;
namespace tk = lexpath::testkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string packs() { return (tk::data_dir() / "packs").string(); }

bool trace_verifies(const std::filesystem::path& file) {
  try {
    import_trace(tk::read_file(file));
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Outcome ac1_golden_arithmetic() {
  const PosteriorState prior{0.3, 0.7, 0};
  const auto s1 = bayes_update(prior, LikelihoodRow{0.8, 0.2});
  const auto row2 = learn_count(LikelihoodRow{0.1, 0.9}, Observed::Cr);
  const auto s2 = bayes_update(s1, row2);
  const double d1 = std::max(std::abs(s1.p_cr - 0.6316), std::abs(s1.p_not_cr - 0.3684));
  const double d2 = std::max(std::abs(s2.p_cr - 0.6769), std::abs(s2.p_not_cr - 0.3231));
  const double d3 = std::max(std::abs(row2.p_cr() - 0.55), std::abs(row2.p_not_cr() - 0.45));
  Outcome o;
  o.pass = d1 <= 5e-5 && d2 <= 5e-5 && d3 <= 1e-12;
  o.detail = "first step " + fmt(s1.p_cr) + "/" + fmt(s1.p_not_cr) + " (max dev " + fmt(d1) + "), second step " +
             fmt(s2.p_cr) + "/" + fmt(s2.p_not_cr) + " (max dev " + fmt(d2) + "), learned row " + fmt(row2.p_cr()) +
             "/" + fmt(row2.p_not_cr()) + " (dev " + fmt(d3) + ")";
  return o;
}

Outcome ac2_order_invariance() {
  tk::Rng rng(20240501);
  std::uniform_real_distribution<double> prior_dist(0.001, 0.999);
  std::uniform_real_distribution<double> count_dist(0.01, 10.0);
  std::uniform_int_distribution<int> size_dist(0, 6);
  double worst = 0;
  std::size_t permutations = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    const double p = prior_dist(rng);
    std::vector<LikelihoodRow> rows(static_cast<std::size_t>(size_dist(rng)));
    for (auto& r : rows) r = {count_dist(rng), count_dist(rng)};
    if (!rows.empty() && instance % 5 == 0) rows.push_back(rows.front());  // repeated rows in the multiset
    if (rows.size() > 6) rows.pop_back();
    const double expected = tk::joint_posterior(p, rows);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    do {
      PosteriorState s{p, 1.0 - p, 0};
      for (auto i : order) s = bayes_update(s, rows[i]);
      worst = std::max({worst, std::abs(s.p_cr - expected), std::abs(s.p_not_cr - (1.0 - expected))});
      ++permutations;
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return {worst <= 1e-12, "1000 instances, " + std::to_string(permutations) + " orderings, max deviation " + fmt(worst)};
}

Outcome ac3_tree_logic() {
  const auto start = std::chrono::steady_clock::now();
  // Three node levels with arity up to 3, plus four levels restricted to binary
  // combinators (the full four-level, arity-3 space has ~2.7e8 shapes).
  auto trees = tk::enumerate_trees(3, 3);
  for (auto& t : tk::enumerate_trees(4, 2)) trees.push_back(std::move(t));
  std::size_t assignments = 0, mismatches = 0;
  const Status values[] = {Status::Rejected, Status::Undetermined, Status::Established};
  for (const auto& tree : trees) {
    const auto ids = tk::leaf_ids(tree);
    std::vector<int> digits(ids.size(), 0);
    StatusMap leaves;
    for (const auto& id : ids) leaves[id] = CriterionStatus{};
    while (true) {
      for (std::size_t i = 0; i < ids.size(); ++i) leaves[ids[i]].status = values[digits[i]];
      if (evaluate_tree(tree, leaves).status != tk::kleene_oracle(tree, leaves)) ++mismatches;
      ++assignments;
      std::size_t i = 0;
      while (i < digits.size() && ++digits[i] == 3) digits[i++] = 0;
      if (i == digits.size()) break;
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatches == 0 && seconds < 60.0, std::to_string(trees.size()) + " trees, " + std::to_string(assignments) +
                                                  " assignments, " + std::to_string(mismatches) + " mismatches, " +
                                                  fmt(seconds) + " s"};
}

const std::vector<std::pair<std::string, std::string>> kLeafEvidence = {
    {"E1", "private_ground_fix"},
    {"testing_permit_active", "non_testing_trip"},
    {"license_class_match", "license_class_mismatch"},
    {"operator_on_roster", "operator_not_on_roster"},
    {"seat_occupied", "seat_empty"},
    {"driver_attentive", "driver_inattentive"},
    {"hands_on_wheel", "manual_override_fault"},
    {"insurance_on_file", "insurance_lapsed"},
};

Outcome ac4_end_to_end() {
  tk::TempDir tmp;
  std::vector<std::string> failures;
  const auto run_infer = [&](const std::string& name, const std::string& evidence, const std::string& policy,
                             int want_code, const std::string& want_action) {
    const auto trace = tmp / (name + ".trace.jsonl");
    const auto r = cli({"--store", packs(), "infer", "--pack", "us-ca-cvc-38750b", "--evidence", evidence, "--policy",
                        policy, "--trace-out", trace.string()});
    if (r.code != want_code || r.out.find("action: " + want_action) == std::string::npos || !trace_verifies(trace)) {
      failures.push_back(name + " (exit " + std::to_string(r.code) + ")");
    }
  };

  const auto full = tk::read_file(tk::data_dir() / "evidence" / "all_established.jsonl");
  run_infer("all-established", (tk::data_dir() / "evidence" / "all_established.jsonl").string(), "argmax", 0,
            "permit_operation");

  std::size_t negations = 0;
  for (const auto& [confirm, refute] : kLeafEvidence) {
    std::string text = full;
    const std::string needle = "\"evidence_id\":\"" + confirm + "\"";
    const auto at = text.find(needle);
    if (at == std::string::npos) {
      failures.push_back("no record for " + confirm);
      continue;
    }
    text.replace(at, needle.size(), "\"evidence_id\":\"" + refute + "\"");
    const auto file = tmp / ("negate-" + confirm + ".jsonl");
    tk::write_file(file, text);
    run_infer("negate-" + confirm, file.string(), "argmax", 10, "stop_and_alert");
    ++negations;
  }

  run_infer("no-evidence", (tk::data_dir() / "evidence" / "empty.jsonl").string(), "certainty", 11,
            "stop_and_alert");

  std::string detail = "all-established exit 0, " + std::to_string(negations) + " single negations exit 10, " +
                       "empty evidence under certainty exit 11, traces verify";
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

Outcome ac5_explanation() {
  tk::TempDir tmp;
  const auto trace = tmp / "session.trace.jsonl";
  const auto inf = cli({"--store", packs(), "infer", "--pack", "us-ca-cvc-38750b", "--evidence",
                        (tk::data_dir() / "evidence" / "road_sign_session.jsonl").string(), "--trace-out",
                        trace.string()});
  if (inf.code != 0) return {false, "infer exited " + std::to_string(inf.code) + ": " + inf.err};
  const auto ex = cli({"explain", "--trace", trace.string()});
  const bool ok = ex.code == 0 && ex.out.find("63.16%") != std::string::npos &&
                  ex.out.find("on public roads") != std::string::npos;
  return {ok, ok ? "operator explanation cites 63.16% and \"on public roads\"" : "explanation: " + ex.out + ex.err};
}

Outcome ac6_round_trips() {
  tk::Rng rng(6);
  std::size_t pack_failures = 0, trace_failures = 0, fuzz_failures = 0;
  std::string first_failure;
  const auto note = [&](const std::string& what) {
    if (first_failure.empty()) first_failure = what;
  };
  for (int i = 0; i < 10000; ++i) {
    const auto pack = tk::random_pack(rng);
    for (auto format : {DocumentFormat::Dsl, DocumentFormat::Json}) {
      const auto text = serialize_pack(pack, format);
      const auto parsed = parse_document(PathDocument{text, format});
      if (!parsed.pack || *parsed.pack != pack || serialize_pack(*parsed.pack, format) != text) {
        ++pack_failures;
        note(std::string("pack round trip in ") + std::string(to_string(format)) +
             (parsed.diagnostics.empty() ? "" : ": " + format_diagnostic(parsed.diagnostics.front())));
      }
    }
  }
  for (int i = 0; i < 10000; ++i) {
    const auto trace = tk::random_trace(rng, static_cast<std::size_t>(rng() % 12));
    try {
      const auto back = import_trace(export_trace(trace, ExportFormat::Jsonl));
      if (back.head_hash() != trace.head_hash() || back != trace) {
        ++trace_failures;
        note("trace head hash changed");
      }
    } catch (const std::exception& e) {
      ++trace_failures;
      note(std::string("trace import: ") + e.what());
    }
  }
  const std::vector<std::string> seeds = {
      tk::read_file(tk::data_dir() / "source" / "us-ca-cvc-38750b.lexpath"),
      tk::read_file(tk::data_dir() / "packs" / "us-ca-cvc-38750b" / "1.0.0.json"),
  };
  for (int i = 0; i < 10000; ++i) {
    const auto input = tk::mutate(seeds[static_cast<std::size_t>(i) % seeds.size()], rng);
    try {
      const auto r = parse_document(PathDocument{input, std::nullopt});
      if (!r.pack && !has_errors(r.diagnostics)) {
        ++fuzz_failures;
        note("rejected input without an ERROR diagnostic");
      }
    } catch (const std::exception& e) {
      ++fuzz_failures;
      note(std::string("parser threw: ") + e.what());
    }
  }
  std::string detail = "10000 packs x 2 formats: " + std::to_string(pack_failures) + " failures; 10000 traces: " +
                       std::to_string(trace_failures) + " failures; 10000 fuzz inputs: " +
                       std::to_string(fuzz_failures) + " failures";
  if (!first_failure.empty()) detail += "; first: " + first_failure;
  return {pack_failures + trace_failures + fuzz_failures == 0, detail};
}

Outcome ac7_extraction() {
  tk::TempDir tmp;
  const auto statute = (tk::data_dir() / "statutes" / "cvc_38750b.txt").string();
  const auto fixtures = (tk::data_dir() / "fixtures").string();
  std::vector<std::string> drafts;
  for (int i = 0; i < 2; ++i) {
    const auto out = tmp / ("draft" + std::to_string(i) + ".json");
    const auto r = cli({"--fixtures", fixtures, "extract", statute, "--replay", "--out", out.string()});
    if (r.code != 0) return {false, "replay exited " + std::to_string(r.code) + ": " + r.err};
    drafts.push_back(tk::read_file(out));
  }
  if (drafts[0] != drafts[1]) return {false, "replayed drafts differ"};
  std::vector<Diagnostic> diags;
  auto result = extraction_result_from_json(nlohmann::json::parse(drafts[0]), diags);
  if (!result || !result->draft_pack) return {false, "draft does not hold a pack"};
  const auto reference =
      parse_document(PathDocument{tk::read_file(tk::data_dir() / "source" / "us-ca-cvc-38750b.lexpath"), std::nullopt});
  if (!reference.pack) return {false, "reference pack does not parse"};
  const auto report = review_report(*result->draft_pack, *reference.pack);
  const bool ok = report.verdict != Equivalence::MajorEdits;
  return {ok, "two replays byte-identical (" + std::to_string(drafts[0].size()) + " bytes), verdict " +
                  std::string(to_string(report.verdict)) + " with " + std::to_string(report.edit_count()) +
                  " structural edits"};
}

Outcome ac8_policy_coherence() {
  tk::Rng rng(8);
  const auto certainty = DecisionPolicy::certainty(1e-9);
  const auto threshold = DecisionPolicy::threshold(0.5);
  const auto argmax = DecisionPolicy::argmax();
  std::size_t violations = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double p = unit(rng);
    switch (i % 10) {
      case 0: p = 1.0 - std::ldexp(unit(rng), -static_cast<int>(rng() % 60)); break;  // near 1
      case 1: p = std::ldexp(unit(rng), -static_cast<int>(rng() % 60)); break;        // near 0
      case 2: p = 0.5 + (unit(rng) - 0.5) * 1e-12; break;                             // near the tie
      case 3: p = i % 20 == 3 ? 0.0 : 1.0; break;
      default: break;
    }
    const PosteriorState s{p, 1.0 - p, 0};
    const auto c = certainty.classify(s), t = threshold.classify(s), a = argmax.classify(s);
    if (c == Status::Established && t != Status::Established) ++violations;
    if (t == Status::Established && a == Status::Rejected) ++violations;
  }
  const PosteriorState tie{0.5, 0.5, 0};
  const bool ties = threshold.classify(tie) == Status::Undetermined && argmax.classify(tie) == Status::Undetermined;
  return {violations == 0 && ties, "10000 posteriors, " + std::to_string(violations) +
                                       " implication violations; exact 0.5 is UNDETERMINED under threshold and argmax: " +
                                       (ties ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 golden arithmetic", ac1_golden_arithmetic},
      {"AC2 order invariance", ac2_order_invariance},
      {"AC3 tree logic", ac3_tree_logic},
      {"AC4 end-to-end scenario", ac4_end_to_end},
      {"AC5 explanation fidelity", ac5_explanation},
      {"AC6 round trips", ac6_round_trips},
      {"AC7 extraction determinism", ac7_extraction},
      {"AC8 policy coherence", ac8_policy_coherence},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
