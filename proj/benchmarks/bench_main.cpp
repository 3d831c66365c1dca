#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lexpath/document.hpp"
#include "lexpath/evidence.hpp"
#include "lexpath/inference.hpp"
#include "lexpath/session.hpp"
#include "lexpath/trace.hpp"

using namespace lexpath;

namespace {

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::filesystem::path kData = LEXPATH_DATA_DIR;

const std::string& source_text() {
  static const std::string text = slurp(kData / "source" / "us-ca-cvc-38750b.lexpath");
  return text;
}

const JurisdictionPack& bundled() {
  static const JurisdictionPack pack = *parse_document({source_text(), std::nullopt}).pack;
  return pack;
}

const std::vector<EvidenceRecord>& session_evidence() {
  static const std::vector<EvidenceRecord> records = [] {
    const auto lines = parse_json_lines(slurp(kData / "evidence" / "road_sign_session.jsonl"));
    return ingest(lines.records).records;
  }();
  return records;
}

// Balanced ALL/ANY tree of the given depth and arity over leaves l0, l1, ...
CriterionNode make_tree(int depth, int arity, int& next) {
  CriterionNode n;
  if (depth == 0) {
    n.criterion_id = "l" + std::to_string(next++);
    n.kind = CriterionKind::Leaf;
    return n;
  }
  n.criterion_id = "n" + std::to_string(next++);
  n.kind = depth % 2 ? CriterionKind::All : CriterionKind::Any;
  for (int i = 0; i < arity; ++i) n.children.push_back(make_tree(depth - 1, arity, next));
  return n;
}

}  // namespace

static void BM_BayesUpdate(benchmark::State& state) {
  PosteriorState s{0.3, 0.7, 0};
  const LikelihoodRow row{0.8, 0.2};
  for (auto _ : state) {
    s = bayes_update(s, row);
    if (s.p_cr > 0.999) s = {0.3, 0.7, 0};
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_BayesUpdate);

static void BM_EvaluateTree(benchmark::State& state) {
  int next = 0;
  const auto root = make_tree(static_cast<int>(state.range(0)), 3, next);
  StatusMap leaves;
  int i = 0;
  for_each_node(root, [&](const CriterionNode& n, std::size_t) {
    if (n.is_leaf()) leaves[n.criterion_id] = CriterionStatus{static_cast<Status>(i++ % 3), std::nullopt, {}};
  });
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_tree(root, leaves));
  state.counters["nodes"] = next;
}
BENCHMARK(BM_EvaluateTree)->DenseRange(2, 6, 2);

static void BM_ParseDsl(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse_document({source_text(), DocumentFormat::Dsl}));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * source_text().size()));
}
BENCHMARK(BM_ParseDsl);

static void BM_ParseJson(benchmark::State& state) {
  const auto json = serialize_pack(bundled(), DocumentFormat::Json);
  for (auto _ : state) benchmark::DoNotOptimize(parse_document({json, DocumentFormat::Json}));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * json.size()));
}
BENCHMARK(BM_ParseJson);

static void BM_RunSession(benchmark::State& state) {
  const auto& pack = bundled();
  SessionOptions options;
  options.evaluated_at = session_evidence().back().timestamp;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_session(pack, pack.paths[0].path_id, session_evidence(), DecisionPolicy::argmax(), options));
  }
}
BENCHMARK(BM_RunSession);

static void BM_TraceVerify(benchmark::State& state) {
  const auto& pack = bundled();
  SessionOptions options;
  options.evaluated_at = session_evidence().back().timestamp;
  const auto trace = run_session(pack, pack.paths[0].path_id, session_evidence(), DecisionPolicy::argmax(), options).trace;
  for (auto _ : state) benchmark::DoNotOptimize(trace.verifies());
  state.counters["events"] = static_cast<double>(trace.size());
}
BENCHMARK(BM_TraceVerify);

static void BM_TraceImport(benchmark::State& state) {
  const auto& pack = bundled();
  SessionOptions options;
  options.evaluated_at = session_evidence().back().timestamp;
  const auto text = export_trace(
      run_session(pack, pack.paths[0].path_id, session_evidence(), DecisionPolicy::argmax(), options).trace,
      ExportFormat::Jsonl);
  for (auto _ : state) benchmark::DoNotOptimize(import_trace(text));
}
BENCHMARK(BM_TraceImport);
BENCHMARK_MAIN();
