#include <fstream>
#include <thread>

#include "doctest.h"
#include "tempdir.hpp"
#include "termweave/error.hpp"
#include "termweave/store.hpp"

using namespace termweave;
using termweave::testing::TempDir;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("init and open") {
  TempDir dir;
  const auto root = dir / "proj";
  CHECK_FALSE(Project::is_project(root));
  CHECK_THROWS_AS(Project::open(root), PrerequisiteError);
  {
    auto p = Project::init(root);
    CHECK(p.writable());
    CHECK(p.manifest().at("format") == 1);
    CHECK(std::filesystem::is_directory(root / "corpus"));
    CHECK(std::filesystem::is_directory(root / "runs"));
  }
  CHECK(Project::is_project(root));
  CHECK_THROWS_AS(Project::init(root), ConflictError);
  auto ro = Project::open(root);
  CHECK_FALSE(ro.writable());
  CHECK_THROWS_AS(ro.save_artifact(ArtifactKind::Corpus, "x"), Error);
}

TEST_CASE("content addressed artifacts") {
  TempDir dir;
  auto p = Project::init(dir.path());
  const auto id = p.save_artifact(ArtifactKind::Corpus, "payload", {{"docs", 3}});
  CHECK(id == sha256_hex("payload").substr(0, 16));
  const auto revision = p.manifest().at("revision").get<int>();
  CHECK(p.save_artifact(ArtifactKind::Corpus, "payload", {{"docs", 3}}) == id);
  CHECK(p.manifest().at("revision").get<int>() == revision);
  CHECK(p.load_artifact(id) == "payload");
  const auto info = p.find(id);
  REQUIRE(info.has_value());
  CHECK(info->kind == ArtifactKind::Corpus);
  CHECK(info->size == 7);
  CHECK(info->meta.at("docs") == 3);
  CHECK(p.artifacts(ArtifactKind::Corpus).size() == 1);
  CHECK(p.artifacts(ArtifactKind::Graph).empty());
  CHECK_FALSE(p.find("0000000000000000").has_value());
  CHECK_THROWS_AS(p.load_artifact("0000000000000000"), NotFoundError);
}

TEST_CASE("explicit ids refuse different content") {
  TempDir dir;
  auto p = Project::init(dir.path());
  CHECK(p.save_artifact(ArtifactKind::Topics, "{}", {}, std::string("abcdef0123456789")) == "abcdef0123456789");
  CHECK(p.save_artifact(ArtifactKind::Topics, "{}", {}, std::string("abcdef0123456789")) == "abcdef0123456789");
  CHECK_THROWS_AS(p.save_artifact(ArtifactKind::Topics, "[]", {}, std::string("abcdef0123456789")), ConflictError);
  CHECK_THROWS_AS(p.save_artifact(ArtifactKind::Topics, "{}", {}, std::string("../escape")), DataError);
}

TEST_CASE("corruption is detected") {
  TempDir dir;
  auto p = Project::init(dir.path());
  const auto id = p.save_artifact(ArtifactKind::Rankings, "0123456789");
  const auto path = dir.path() / p.find(id)->path;

  SUBCASE("truncated") {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << "01234";
    CHECK_THROWS_AS(p.load_artifact(id), ChecksumError);
  }
  SUBCASE("same size, different bytes") {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << "0123456780";
    CHECK_THROWS_AS(p.load_artifact(id), ChecksumError);
  }
  SUBCASE("deleted") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(p.load_artifact(id), ChecksumError);
    // re-saving the same bytes restores the file
    CHECK(p.save_artifact(ArtifactKind::Rankings, "0123456789") == id);
    CHECK(p.load_artifact(id) == "0123456789");
  }
}

TEST_CASE("single writer lock") {
  TempDir dir;
  auto writer = Project::init(dir.path());
  CHECK_THROWS_AS(Project::open(dir.path(), Project::Mode::Write), ConflictError);
  auto reader = Project::open(dir.path(), Project::Mode::Read);
  writer.save_artifact(ArtifactKind::Corpus, "a");
  CHECK(reader.artifacts(ArtifactKind::Corpus).size() == 1);
  {
    auto moved = std::move(writer);
    CHECK(moved.writable());
  }
  auto again = Project::open(dir.path(), Project::Mode::Write);
  CHECK(again.writable());
}

TEST_CASE("external manifest edits are conflicts") {
  TempDir dir;
  auto p = Project::init(dir.path());
  auto m = p.manifest();
  m["revision"] = m.at("revision").get<int>() + 5;
  write_file_atomic(dir.path() / "manifest.json", m.dump());
  CHECK_THROWS_AS(p.update_manifest([](nlohmann::json& j) { j["corpus"] = "x"; }), ConflictError);
  CHECK_THROWS_AS(p.save_artifact(ArtifactKind::Corpus, "a"), ConflictError);

  write_file_atomic(dir.path() / "manifest.json", "not json");
  CHECK_THROWS_AS(p.manifest(), DataError);
}

TEST_CASE("manifest updates and exports") {
  TempDir dir;
  auto p = Project::init(dir.path());
  p.update_manifest([](nlohmann::json& j) { j["corpus"] = "c1"; });
  CHECK(p.manifest().at("corpus") == "c1");
  p.write_file("sheets/a.csv", "x,y\n");
  CHECK(read_file(dir.path() / "sheets/a.csv") == "x,y\n");
  CHECK_THROWS_AS(p.write_file("../outside.csv", "x"), DataError);
  CHECK_THROWS_AS(read_file(dir.path() / "nope"), NotFoundError);
}

TEST_CASE("property: concurrent saves all land in the manifest") {
  TempDir dir;
  auto p = Project::init(dir.path());
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) p.save_artifact(ArtifactKind::Eval, std::to_string(t * 100 + i));
    });
  }
  for (auto& t : threads) t.join();
  const auto all = p.artifacts(ArtifactKind::Eval);
  CHECK(all.size() == 40);
  for (const auto& a : all) CHECK_NOTHROW(p.load_artifact(a.id));
}
