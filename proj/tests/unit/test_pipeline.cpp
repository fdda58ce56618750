#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "planted.hpp"
#include "tempdir.hpp"
#include "termweave/error.hpp"
#include "termweave/pipeline.hpp"

using namespace termweave;
using termweave::testing::TempDir;

namespace {

termweave::testing::PlantedCorpus small_planted() {
  termweave::testing::PlantedParams p;
  p.topics = 3;
  p.terms_per_topic = 30;
  p.docs_per_topic = 30;
  p.topic_tokens = 25;
  p.noise_tokens = 8;
  p.noise_pool = 100;
  p.seed = 5;
  return termweave::testing::make_planted_corpus(p);
}

Config fast_config() {
  Config c;
  c.threads = 1;
  c.detect.n_rep = 6;
  c.detect.n_con = 5;
  return c;
}

std::filesystem::path write_corpus(const TempDir& dir) {
  return dir.write("corpus.jsonl", termweave::testing::to_jsonl(small_planted().documents));
}

}  // namespace

TEST_CASE("config json") {
  TempDir dir;
  const auto j = nlohmann::json::parse(R"({
    "ranking": {"alpha": 0.8, "window": 4, "parts": 10},
    "detect": {"gamma": 0.8, "seed": 7},
    "graph": {"reduction": 30},
    "presentation": {"vectors": "vec.txt", "linkage": "average", "share_mode": "unique"},
    "threads": 2
  })");
  const auto c = config_from_json(j, dir.path());
  CHECK(c.ranking.alpha == 0.8);
  CHECK(c.ranking.window == 4);
  CHECK(c.ranking.beta == -0.9);
  CHECK(c.levels.parts == 10);
  CHECK(c.detect.gamma == 0.8);
  CHECK(c.detect.seed == 7);
  CHECK(c.graph.reduction == 30);
  CHECK(c.presentation.vectors == dir / "vec.txt");
  CHECK(c.presentation.linkage == Linkage::Average);
  CHECK(c.presentation.share_mode == ShareMode::UniqueTerms);
  CHECK(c.threads == 2);

  const auto back = config_from_json(to_json(c));
  CHECK(back.detect.gamma == 0.8);
  CHECK(back.levels.parts == 10);
  CHECK(back.presentation.linkage == Linkage::Average);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"detect": {"gama": 1}})")), DataError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"extra": 1})")), DataError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"presentation": {"linkage": "median"}})")), DataError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"detect": {"gamma": "x"}})")), DataError);

  Config bad;
  bad.graph.reduction = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);

  CHECK(project_config(dir.path()).detect.gamma == 1.0);
  dir.write("config.json", R"({"detect": {"gamma": 2.5}})");
  CHECK(project_config(dir.path()).detect.gamma == 2.5);
}

TEST_CASE("params hash") {
  DetectParams a;
  auto b = a;
  CHECK(params_hash(a, 50, "g1") == params_hash(b, 50, "g1"));
  CHECK(params_hash(a, 50, "g1").size() == 16);
  b.seed = 1;
  CHECK(params_hash(a, 50, "g1") != params_hash(b, 50, "g1"));
  CHECK(params_hash(a, 50, "g1") != params_hash(a, 40, "g1"));
  CHECK(params_hash(a, 50, "g1") != params_hash(a, 50, "g2"));
}

TEST_CASE("stages require their inputs") {
  TempDir dir;
  auto project = Project::init(dir / "p");
  Workspace ws(project, fast_config());
  CHECK_THROWS_AS(ws.rank(), PrerequisiteError);
  CHECK_THROWS_AS(ws.graph(), PrerequisiteError);
  CHECK_THROWS_AS(ws.detect(DetectParams{}), PrerequisiteError);

  ws.ingest(write_corpus(dir), CorpusFormat::Jsonl);
  CHECK_THROWS_AS(ws.graph(), PrerequisiteError);
  ws.rank();
  ws.graph(100);
  try {
    ws.detect(fast_config().detect, 50);
    FAIL("detect without a graph succeeded");
  } catch (const PrerequisiteError& e) {
    CHECK(std::string(e.what()).find("run graph first") != std::string::npos);
  }
  CHECK_THROWS_AS(ws.graph(0), DataError);
  CHECK_THROWS_AS(ws.topics("0123456789abcdef"), NotFoundError);
  CHECK_THROWS_AS(ws.sheet_bundle("0123456789abcdef"), PrerequisiteError);
}

TEST_CASE("full pipeline on a planted corpus") {
  TempDir dir;
  auto project = Project::init(dir / "p");
  auto config = fast_config();
  // one-hot vectors per planted topic, so strata follow the planted topics
  const auto planted = small_planted();
  std::string vectors = std::to_string(planted.topic_of_term.size()) + " 3\n";
  for (const auto& [term, topic] : planted.topic_of_term) {
    vectors += term;
    for (int k = 0; k < 3; ++k) vectors += k == topic ? " 5" : " 0";
    vectors += "\n";
  }
  config.presentation.vectors = dir.write("vec.txt", vectors);
  Workspace ws(project, config);

  auto r = ws.ingest(write_corpus(dir), CorpusFormat::Jsonl);
  CHECK_FALSE(r.cached);
  CHECK(r.summary.rfind("ingest:", 0) == 0);
  CHECK(ws.corpus()->documents.size() == 90);

  r = ws.rank();
  CHECK(r.stage == "rank");
  CHECK(ws.rank().cached);

  r = ws.graph();
  CHECK(ws.term_graph(r.artifact)->reduction == 50);
  CHECK(ws.graph().cached);

  r = ws.detect(config.detect);
  const auto run = r.artifact;
  CHECK_FALSE(r.cached);
  CHECK(ws.detect(config.detect).cached);
  CHECK(ws.find_run(config.detect, 50) == run);
  const auto info = ws.run_info(run);
  CHECK(info.topic_count == 3);
  CHECK(info.coverage() > 50.0);
  CHECK(ws.runs().size() == 1);

  // the planted terms of each detected topic come from a single planted topic
  const auto topics = ws.topics(run);
  const auto& vocab = ws.corpus()->vocabulary;
  for (const auto& topic : topics->topics) {
    std::vector<int> hits(3, 0);
    for (auto t : topic) {
      auto it = planted.topic_of_term.find(vocab.term(t));
      if (it != planted.topic_of_term.end()) ++hits[it->second];
    }
    CHECK(*std::max_element(hits.begin(), hits.end()) == hits[0] + hits[1] + hits[2]);
  }

  r = ws.sheets(run);
  CHECK(std::filesystem::exists(dir / "p" / "sheets" / (run + ".csv")));
  const auto bundle = ws.sheet_bundle(run);
  REQUIRE(bundle->sheets.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<TermId> all = bundle->sheets[i].residual;
    for (const auto& s : bundle->sheets[i].strata) all.insert(all.end(), s.begin(), s.end());
    std::sort(all.begin(), all.end());
    CHECK(all == topics->topics[i]);
  }

  r = ws.eval(run);
  const auto e = ws.evaluate(run);
  CHECK(e.stats.weighted.f1 >= 0.95);
  CHECK(std::filesystem::exists(dir / "p" / "eval" / (run + "-crosstable.csv")));

  const auto shares = ws.shares(run, "doc0_0");
  CHECK(shares.dominant.has_value());
  CHECK_THROWS_AS(ws.shares(run, "no-such-doc"), NotFoundError);

  const auto flow = ws.compare(run, run);
  for (std::size_t i = 0; i < flow.rows; ++i) {
    for (std::size_t j = 0; j < flow.cols; ++j) {
      if (i != j) CHECK(flow.counts[i][j] == 0);
    }
  }

  const auto steps = ws.sweep({0.5, 1.0}, config.detect);
  REQUIRE(steps.size() == 2);
  CHECK_FALSE(steps[0].from_previous.has_value());
  CHECK(steps[1].from_previous.has_value());
  CHECK(steps[1].run.id == run);
}

TEST_CASE("identical inputs give identical runs in separate projects") {
  TempDir dir;
  const auto corpus = write_corpus(dir);
  std::vector<std::string> runs;
  std::vector<std::vector<std::vector<TermId>>> topics;
  for (const char* name : {"a", "b"}) {
    auto project = Project::init(dir / name);
    Workspace ws(project, fast_config());
    ws.ingest(corpus, CorpusFormat::Jsonl);
    ws.rank();
    ws.graph(100);
    runs.push_back(ws.detect(fast_config().detect, 100).artifact);
    topics.push_back(ws.topics(runs.back())->topics);
  }
  CHECK(runs[0] == runs[1]);
  CHECK(topics[0] == topics[1]);
  CHECK(read_file(dir / "a" / "runs" / runs[0] / "topics.json") ==
        read_file(dir / "b" / "runs" / runs[1] / "topics.json"));
}

TEST_CASE("evaluation needs class labels") {
  TempDir dir;
  auto docs = small_planted().documents;
  for (auto& d : docs) d.class_label.reset();
  const auto path = dir.write("c.jsonl", termweave::testing::to_jsonl(docs));
  auto project = Project::init(dir / "p");
  Workspace ws(project, fast_config());
  ws.ingest(path, CorpusFormat::Jsonl);
  ws.rank();
  ws.graph();
  const auto run = ws.detect(fast_config().detect).artifact;
  CHECK_THROWS_AS(ws.evaluate(run), DataError);
}
