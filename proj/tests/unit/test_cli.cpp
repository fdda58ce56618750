#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "planted.hpp"
#include "tempdir.hpp"

using termweave::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = termweave::cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string corpus(const TempDir& dir) {
  termweave::testing::PlantedParams p;
  p.topics = 3;
  p.terms_per_topic = 25;
  p.docs_per_topic = 25;
  p.topic_tokens = 20;
  p.noise_tokens = 6;
  p.noise_pool = 80;
  return dir.write("c.jsonl", termweave::testing::to_jsonl(termweave::testing::make_planted_corpus(p).documents))
      .string();
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  ::unsetenv("TERMWEAVE_PROJECT");
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"rank"}).code == 1);
  CHECK(run({"rank"}).err.find("no project") != std::string::npos);
  CHECK(run({"-p", "x", "detect", "--gamma", "abc"}).code == 1);
  CHECK(run({"-p", "x", "ingest", "f", "--corpus-format", "xml"}).code == 1);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("detect") != std::string::npos);
}

TEST_CASE("stage failures exit with 2") {
  TempDir dir;
  const auto p = (dir / "p").string();
  CHECK(run({"-p", p, "rank"}).code == 2);
  CHECK(run({"-p", p, "init"}).code == 0);
  CHECK(run({"-p", p, "init"}).code == 2);
  const auto r = run({"-p", p, "rank"});
  CHECK(r.code == 2);
  CHECK(r.err.find("run ingest first") != std::string::npos);
  CHECK(run({"-p", p, "ingest", (dir / "missing.jsonl").string()}).code == 2);
  CHECK(run({"-p", p, "detect", "--gamma", "-1"}).code == 2);
}

TEST_CASE("full command sequence") {
  TempDir dir;
  const auto p = (dir / "p").string();
  const auto src = corpus(dir);
  REQUIRE(run({"-p", p, "init"}).code == 0);

  auto r = run({"-p", p, "ingest", src});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("ingest: 75 documents", 0) == 0);

  r = run({"-p", p, "rank", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("term,r,Df,sum_q\n", 0) == 0);
  CHECK(r.err.rfind("rank:", 0) == 0);

  REQUIRE(run({"-p", p, "graph", "--reduction", "100"}).code == 0);
  r = run({"-p", p, "detect", "--reduction", "50"});
  CHECK(r.code == 2);
  CHECK(r.err.find("run graph first") != std::string::npos);

  r = run({"-p", p, "--threads", "1", "detect", "--reduction", "100", "--n-rep", "5", "--n-con", "4"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("detect:", 0) == 0);
  r = run({"-p", p, "detect", "--reduction", "100", "--n-rep", "5", "--n-con", "4", "--format", "json"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("cached") != std::string::npos);
  const auto topics = nlohmann::json::parse(r.out);
  CHECK(topics.at("topics").size() == 3);

  r = run({"-p", p, "sheets"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("sheets:", 0) == 0);

  r = run({"-p", p, "eval", "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("class,", 0) == 0);
  CHECK(r.out.find("weighted avg,") != std::string::npos);

  r = run({"-p", p, "sweep", "--gamma", "0.8,1.2", "--reduction", "100", "--n-rep", "5", "--n-con", "4"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("sweep: gamma=0.8") != std::string::npos);
  CHECK(r.out.find("topic,a0") != std::string::npos);
}
