#include <doctest.h>

#include "helpers.hpp"

using namespace lexpath;

namespace {

bool has_pointer(const std::vector<Diagnostic>& ds, const std::string& pointer) {
  for (const auto& d : ds) {
    if (d.location.pointer == pointer) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("small pack is valid") { CHECK(validate_pack(test::small_pack()).empty()); }

TEST_CASE("validator reports each broken invariant at its pointer") {
  SUBCASE("pack id") {
    auto p = test::small_pack();
    p.pack_id = "bad/id";
    CHECK(has_pointer(validate_pack(p), "/pack_id"));
  }
  SUBCASE("version") {
    auto p = test::small_pack();
    p.version = "1.0";
    CHECK(has_pointer(validate_pack(p), "/version"));
  }
  SUBCASE("no paths") {
    auto p = test::small_pack();
    p.paths.clear();
    CHECK(has_pointer(validate_pack(p), "/paths"));
  }
  SUBCASE("duplicate path id") {
    auto p = test::small_pack();
    p.paths.push_back(p.paths[0]);
    CHECK_FALSE(validate_pack(p).empty());
  }
  SUBCASE("empty action") {
    auto p = test::small_pack();
    p.paths[0].consequence.reject_action.action_id.clear();
    CHECK(has_pointer(validate_pack(p), "/paths/0/consequence/reject_action/action_id"));
  }
  SUBCASE("span order") {
    auto p = test::small_pack();
    p.paths[0].source_spans.push_back({10, 5});
    CHECK(has_pointer(validate_pack(p), "/paths/0/source_spans/0"));
  }
  SUBCASE("NOT arity") {
    auto p = test::small_pack();
    p.paths[0].root.kind = CriterionKind::Not;
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children"));
  }
  SUBCASE("ALL arity") {
    auto p = test::small_pack();
    p.paths[0].root.children.pop_back();
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children"));
  }
  SUBCASE("leaf with children") {
    auto p = test::small_pack();
    p.paths[0].root.children[0].children.push_back(test::leaf("x", 0.5));
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children/0/children"));
  }
  SUBCASE("missing prior") {
    auto p = test::small_pack();
    p.paths[0].root.children[0].prior.reset();
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children/0/prior"));
  }
  SUBCASE("prior on a composite") {
    auto p = test::small_pack();
    p.paths[0].root.prior = Prior{};
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/prior"));
  }
  SUBCASE("prior out of range") {
    auto p = test::small_pack();
    p.paths[0].root.children[0].prior = Prior{1.5, -0.5};
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children/0/prior"));
  }
  SUBCASE("negative counts") {
    auto p = test::small_pack();
    p.paths[0].root.children[0].evidence_specs[0].likelihood = {-1, 2};
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children/0/evidence_specs/0/likelihood"));
  }
  SUBCASE("degenerate row") {
    auto p = test::small_pack();
    p.paths[0].root.children[0].evidence_specs[0].likelihood = {0, 0};
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children/0/evidence_specs/0/likelihood"));
  }
  SUBCASE("evidence ids are unique pack-wide") {
    auto p = test::small_pack();
    p.paths[0].root.children[1].evidence_specs[0].evidence_id = "ea";
    CHECK(has_pointer(validate_pack(p), "/paths/0/root/children/1/evidence_specs/0/evidence_id"));
  }
  SUBCASE("criterion ids are unique pack-wide") {
    auto p = test::small_pack();
    auto second = p.paths[0];
    second.path_id = "q";
    p.paths.push_back(second);
    CHECK_FALSE(validate_pack(p).empty());
  }
}

TEST_CASE("likelihood rows renormalise pseudo-counts") {
  const LikelihoodRow row{3, 1};
  CHECK(row.p_cr() == doctest::Approx(0.75));
  CHECK(row.p_not_cr() == doctest::Approx(0.25));
  CHECK(LikelihoodRow{0, 0}.degenerate());
  CHECK_FALSE(LikelihoodRow{0, 1}.degenerate());
  const auto from = LikelihoodRow::from_probability(0.8, 10);
  CHECK(from.count_given_cr == doctest::Approx(8));
  CHECK(from.count_given_not_cr == doctest::Approx(2));
}

TEST_CASE("evidence source filter") {
  const auto any = test::spec("x", 1, 1);
  CHECK(any.accepts(SourceType::Manual));
  const auto sensor = test::spec("y", 1, 1, {SourceType::Sensor});
  CHECK(sensor.accepts(SourceType::Sensor));
  CHECK_FALSE(sensor.accepts(SourceType::Document));
}

TEST_CASE("tree helpers") {
  const auto pack = test::bundled_pack();
  const auto& root = pack.paths[0].root;
  CHECK(find_criterion(root, "driver_monitoring") != nullptr);
  CHECK(find_criterion(root, "nope") == nullptr);
  std::vector<std::pair<std::string, std::size_t>> order;
  for_each_node(root, [&](const CriterionNode& n, std::size_t depth) { order.emplace_back(n.criterion_id, depth); });
  REQUIRE(order.size() == 10);
  CHECK(order[0] == std::make_pair(std::string("all_requirements_met"), std::size_t{0}));
  CHECK(order[1].first == "on_public_roads");
  CHECK(order[6] == std::make_pair(std::string("driver_seated"), std::size_t{2}));
  CHECK(pack.find_path("cvc_38750b_testing") != nullptr);
  CHECK(pack.find_path("other") == nullptr);
}

TEST_CASE("enum names round-trip") {
  for (auto k : {CriterionKind::Leaf, CriterionKind::All, CriterionKind::Any, CriterionKind::Not}) {
    CHECK(parse_criterion_kind(to_string(k)) == k);
  }
  for (auto s : {SourceType::Sensor, SourceType::Geospatial, SourceType::Document, SourceType::Manual}) {
    CHECK(parse_source_type(to_string(s)) == s);
  }
  CHECK_FALSE(parse_source_type("RADAR"));
}
