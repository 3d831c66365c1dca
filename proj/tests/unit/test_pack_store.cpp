#include <doctest.h>

#include <thread>

#include "helpers.hpp"
#include "lexpath/pack_store.hpp"

using namespace lexpath;
namespace tk = lexpath::testkit;

namespace {

JurisdictionPack with_version(std::string version) {
  auto p = test::small_pack();
  p.version = std::move(version);
  return p;
}

}  // namespace

TEST_CASE("store, list and load versions") {
  tk::TempDir dir;
  PackStore store(dir.path());
  for (const char* v : {"1.0.0", "1.2.0", "1.10.0", "2.0.0"}) CHECK(store.store(with_version(v)).created);
  const auto versions = store.versions("small");
  REQUIRE(versions.size() == 4);
  CHECK(versions[2].to_string() == "1.10.0");
  CHECK(store.pack_ids() == std::vector<std::string>{"small"});
  CHECK(store.load("small", "latest").version == "2.0.0");
  CHECK(store.load("small", "^1").version == "1.10.0");
  CHECK(store.load("small", "~1.2").version == "1.2.0");
  CHECK(store.load("small", "1.0.0") == with_version("1.0.0"));
  CHECK(store.file_for("small", *Version::parse("1.2.0")) == dir.path() / "small" / "1.2.0.json");
  CHECK(test::error_code_of([&] { store.load("small", "^3"); }) == ErrorCode::NotFound);
  CHECK(test::error_code_of([&] { store.load("other", "*"); }) == ErrorCode::NotFound);
  CHECK(test::error_code_of([&] { store.load("small", "garbage"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("versions are immutable") {
  tk::TempDir dir;
  PackStore store(dir.path());
  const auto first = store.store(with_version("1.0.0"));
  const auto again = store.store(with_version("1.0.0"));
  CHECK_FALSE(again.created);
  CHECK(again.sha256 == first.sha256);
  auto changed = with_version("1.0.0");
  changed.jurisdiction = "Elsewhere";
  CHECK(test::error_code_of([&] { store.store(changed); }) == ErrorCode::DuplicateVersion);
  CHECK(store.load("small", "1.0.0").jurisdiction == "Test");
}

TEST_CASE("invalid packs are refused and corrupt files reported") {
  tk::TempDir dir;
  PackStore store(dir.path());
  auto bad = test::small_pack();
  bad.paths.clear();
  CHECK(test::error_code_of([&] { store.store(bad); }) == ErrorCode::ValidationFailed);
  store.store(with_version("1.0.0"));
  tk::write_file(dir.path() / "small" / "1.0.0.json", "{");
  CHECK(test::error_code_of([&] { store.load("small", "*"); }) == ErrorCode::ValidationFailed);
  tk::write_file(dir.path() / "small" / "notes.txt", "ignored");
  CHECK(store.versions("small").size() == 1);
}

TEST_CASE("a stored file under the wrong name is not trusted") {
  tk::TempDir dir;
  PackStore store(dir.path());
  store.store(with_version("1.0.0"));
  std::filesystem::copy_file(dir.path() / "small" / "1.0.0.json", dir.path() / "small" / "1.0.1.json");
  CHECK(test::error_code_of([&] { store.load("small", "1.0.1"); }) == ErrorCode::ValidationFailed);
}

TEST_CASE("concurrent writers of distinct versions all land") {
  tk::TempDir dir;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      PackStore store(dir.path());
      for (int i = 0; i < 5; ++i) store.store(with_version("1." + std::to_string(t) + "." + std::to_string(i)));
    });
  }
  for (auto& th : threads) th.join();
  CHECK(PackStore(dir.path()).versions("small").size() == 20);
}

TEST_CASE("bundled store holds both released versions") {
  PackStore store(tk::data_dir() / "packs");
  const auto versions = store.versions("us-ca-cvc-38750b");
  REQUIRE(versions.size() == 2);
  const auto v100 = store.load("us-ca-cvc-38750b", "1.0.0");
  const auto v101 = store.load("us-ca-cvc-38750b", "latest");
  CHECK(v101.version == "1.0.1");
  const auto* e2_old = find_criterion(v100.paths[0].root, "on_public_roads")->find_evidence("E2");
  const auto* e2_new = find_criterion(v101.paths[0].root, "on_public_roads")->find_evidence("E2");
  CHECK(e2_old->likelihood == LikelihoodRow{0.1, 0.9});
  CHECK(e2_new->likelihood == LikelihoodRow{1.1, 0.9});
  CHECK(load_pack(tk::data_dir() / "packs", "us-ca-cvc-38750b", "1.0.0") == v100);
}
